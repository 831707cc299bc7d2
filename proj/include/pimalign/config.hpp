#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace pimalign {

/// Geometry and cost coefficients of the simulated PIM machine.
///
/// Capacities follow the commercial part (2560 DPUs, 24 threads, 64KB WRAM,
/// 64MB MRAM per DPU, 425MHz). The DMA rules and cycle coefficients are
/// model parameters; they only make sense for relative comparisons.
struct PimConfig {
    std::uint32_t num_dpus = 2560;
    std::uint32_t threads_per_dpu_max = 24;
    std::uint64_t wram_bytes = 65536;
    std::uint64_t mram_bytes = 67108864;
    std::uint32_t dma_alignment = 8;
    std::uint32_t dma_max_transfer = 2048;
    double dma_fixed_cycles = 77;
    double dma_per_byte_cycles = 0.5;
    double wram_access_cycles = 1;
    double dpu_frequency_hz = 425e6;
    // Stack and globals shared by all tasklets; carved off before WRAM is split.
    std::uint64_t wram_reserve_bytes = 2048;

    void validate() const {
        auto fail = [](const std::string& msg) { throw PimError(ErrorCode::ConfigError, msg); };
        if (num_dpus == 0) fail("num_dpus must be positive");
        if (threads_per_dpu_max == 0 || threads_per_dpu_max > 24)
            fail("threads_per_dpu_max must be in [1, 24]");
        if (wram_bytes == 0) fail("wram_bytes must be positive");
        if (mram_bytes == 0) fail("mram_bytes must be positive");
        if (dma_alignment == 0 || (dma_alignment & (dma_alignment - 1)) != 0)
            fail("dma_alignment must be a power of two");
        if (dma_max_transfer == 0 || dma_max_transfer % dma_alignment != 0)
            fail("dma_max_transfer must be a positive multiple of dma_alignment");
        if (mram_bytes % dma_alignment != 0) fail("mram_bytes must be a multiple of dma_alignment");
        if (wram_reserve_bytes >= wram_bytes) fail("wram_reserve_bytes must be below wram_bytes");
        if (dma_fixed_cycles < 0 || dma_per_byte_cycles < 0 || wram_access_cycles < 0)
            fail("cycle coefficients must be non-negative");
        if (dpu_frequency_hz <= 0) fail("dpu_frequency_hz must be positive");
    }

    std::uint64_t usable_wram() const { return wram_bytes - wram_reserve_bytes; }

    static const std::vector<std::string>& keys() {
        static const std::vector<std::string> k = {
            "num_dpus",         "threads_per_dpu_max", "wram_bytes",          "mram_bytes",
            "dma_alignment",    "dma_max_transfer",    "dma_fixed_cycles",    "dma_per_byte_cycles",
            "wram_access_cycles", "dpu_frequency_hz",  "wram_reserve_bytes",
        };
        return k;
    }

    /// Sets one field by its name. Unknown keys and malformed numbers are ConfigError.
    void set(const std::string& key, const std::string& value) {
        auto as_u64 = [&]() -> std::uint64_t {
            std::size_t pos = 0;
            unsigned long long v = 0;
            try {
                v = std::stoull(value, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos == 0 || pos != value.size() || value.front() == '-')
                throw PimError(ErrorCode::ConfigError, "bad integer for " + key + ": '" + value + "'");
            return v;
        };
        auto as_double = [&]() -> double {
            std::size_t pos = 0;
            double v = 0;
            try {
                v = std::stod(value, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos == 0 || pos != value.size())
                throw PimError(ErrorCode::ConfigError, "bad number for " + key + ": '" + value + "'");
            return v;
        };
        if (key == "num_dpus") num_dpus = static_cast<std::uint32_t>(as_u64());
        else if (key == "threads_per_dpu_max") threads_per_dpu_max = static_cast<std::uint32_t>(as_u64());
        else if (key == "wram_bytes") wram_bytes = as_u64();
        else if (key == "mram_bytes") mram_bytes = as_u64();
        else if (key == "dma_alignment") dma_alignment = static_cast<std::uint32_t>(as_u64());
        else if (key == "dma_max_transfer") dma_max_transfer = static_cast<std::uint32_t>(as_u64());
        else if (key == "dma_fixed_cycles") dma_fixed_cycles = as_double();
        else if (key == "dma_per_byte_cycles") dma_per_byte_cycles = as_double();
        else if (key == "wram_access_cycles") wram_access_cycles = as_double();
        else if (key == "dpu_frequency_hz") dpu_frequency_hz = as_double();
        else if (key == "wram_reserve_bytes") wram_reserve_bytes = as_u64();
        else throw PimError(ErrorCode::ConfigError, "unknown config key '" + key + "'");
    }

    /// Applies `key=value` lines ('#' starts a comment) or a flat JSON object.
    void load_text(const std::string& text) {
        std::size_t first = text.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && text[first] == '{') {
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(text);
            } catch (const nlohmann::json::exception& e) {
                throw PimError(ErrorCode::ConfigError, std::string("bad JSON config: ") + e.what());
            }
            if (!doc.is_object()) throw PimError(ErrorCode::ConfigError, "JSON config must be an object");
            for (const auto& [key, value] : doc.items()) {
                if (value.is_number()) set(key, value.dump());
                else if (value.is_string()) set(key, value.get<std::string>());
                else throw PimError(ErrorCode::ConfigError, "non-scalar value for " + key);
            }
            return;
        }
        std::istringstream in(text);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw PimError(ErrorCode::ConfigError,
                               "line " + std::to_string(line_no) + ": expected key=value");
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    static PimConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw PimError(ErrorCode::IoError, "cannot open config file " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        PimConfig cfg;
        cfg.load_text(buf.str());
        cfg.validate();
        return cfg;
    }
};

}  // namespace pimalign
