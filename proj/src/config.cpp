// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/config.hpp"

#include <fstream>
#include <sstream>

namespace wm {

void ModelConfig::validate() const {
    check(base_width >= 1, "config: base_width must be >= 1");
    check(state_size >= 1, "config: state_size must be >= 1");
    check(expand >= 1, "config: expand must be >= 1");
}

std::string ModelConfig::canonical_text() const {
    std::ostringstream os;
    os << "watermamba config v1\n";
    os << "base_width=" << base_width << "\n";
    os << "state_size=" << state_size << "\n";
    os << "expand=" << expand << "\n";
    os << "msffn_fuse=" << (msffn_fuse == MsffnFuse::sum ? "sum" : "concat_proj") << "\n";
    os << "skip_fuse=" << (skip_fuse == SkipFuse::concat ? "concat" : "add") << "\n";
    os << "discretization=" << (euler_discretization ? "euler" : "zoh") << "\n";
    os << "use_soss=" << (use_soss ? 1 : 0) << "\n";
    os << "use_ccoss=" << (use_ccoss ? 1 : 0) << "\n";
    os << "use_msffn=" << (use_msffn ? 1 : 0) << "\n";
    return os.str();
}

ModelConfig ModelConfig::parse(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    check(static_cast<bool>(std::getline(is, line)) && line == "watermamba config v1",
          "config: missing 'watermamba config v1' header line");
    ModelConfig cfg;
    auto parse_bool = [](const std::string& key, const std::string& v) {
        check(v == "0" || v == "1", "config: " + key + " must be 0 or 1, got '" + v + "'");
        return v == "1";
    };
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        check(eq != std::string::npos, "config: malformed line '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "base_width") {
            cfg.base_width = std::stoll(value);
        } else if (key == "state_size") {
            cfg.state_size = std::stoll(value);
        } else if (key == "expand") {
            cfg.expand = std::stoll(value);
        } else if (key == "msffn_fuse") {
            check(value == "sum" || value == "concat_proj", "config: bad msffn_fuse '" + value + "'");
            cfg.msffn_fuse = value == "sum" ? MsffnFuse::sum : MsffnFuse::concat_proj;
        } else if (key == "skip_fuse") {
            check(value == "concat" || value == "add", "config: bad skip_fuse '" + value + "'");
            cfg.skip_fuse = value == "concat" ? SkipFuse::concat : SkipFuse::add;
        } else if (key == "discretization") {
            check(value == "zoh" || value == "euler", "config: bad discretization '" + value + "'");
            cfg.euler_discretization = value == "euler";
        } else if (key == "use_soss") {
            cfg.use_soss = parse_bool(key, value);
        } else if (key == "use_ccoss") {
            cfg.use_ccoss = parse_bool(key, value);
        } else if (key == "use_msffn") {
            cfg.use_msffn = parse_bool(key, value);
        } else {
            fail("config: unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

ModelConfig ModelConfig::load_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    check(f.good(), "config: cannot open '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return parse(os.str());
}

}  // namespace wm
