#include "wgspec/config.hpp"
#include "wgspec/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace wgspec {

namespace {

struct TomlValue {
    enum class Kind { String, Number, Bool, Array } kind = Kind::Number;
    std::string str;
    double num = 0;
    bool boolean = false;
    std::vector<TomlValue> arr;
    int line = 0, col = 0;
};

struct TomlParser {
    const std::string& src;
    size_t pos = 0;
    int line = 1, col = 1;
    std::map<std::string, TomlValue> values;

    explicit TomlParser(const std::string& s) : src(s) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("cli", "config parse error at line " + std::to_string(line) + ", col " +
                                     std::to_string(col) + ": " + msg);
    }

    char peek() const { return pos < src.size() ? src[pos] : '\0'; }

    char advance() {
        const char c = src[pos++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }

    void skip_ws_and_comments(bool stop_at_newline) {
        while (pos < src.size()) {
            const char c = peek();
            if (c == '#') {
                while (pos < src.size() && peek() != '\n') advance();
            } else if (c == '\n') {
                if (stop_at_newline) return;
                advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                return;
            }
        }
    }

    std::string parse_bare_key() {
        std::string k;
        while (pos < src.size()) {
            const char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
                k += advance();
            } else {
                break;
            }
        }
        if (k.empty()) fail("expected a key");
        return k;
    }

    TomlValue parse_value() {
        skip_ws_and_comments(true);
        TomlValue v;
        v.line = line;
        v.col = col;
        const char c = peek();
        if (c == '"') {
            advance();
            v.kind = TomlValue::Kind::String;
            while (pos < src.size() && peek() != '"') {
                char ch = advance();
                if (ch == '\\' && pos < src.size()) {
                    const char esc = advance();
                    switch (esc) {
                    case 'n': ch = '\n'; break;
                    case 't': ch = '\t'; break;
                    case '"': ch = '"'; break;
                    case '\\': ch = '\\'; break;
                    default: fail("unsupported string escape");
                    }
                }
                v.str += ch;
            }
            if (peek() != '"') fail("unterminated string");
            advance();
        } else if (c == '[') {
            advance();
            v.kind = TomlValue::Kind::Array;
            skip_ws_and_comments(false);
            if (peek() == ']') {
                advance();
                return v;
            }
            for (;;) {
                v.arr.push_back(parse_value());
                skip_ws_and_comments(false);
                if (peek() == ',') {
                    advance();
                    skip_ws_and_comments(false);
                    if (peek() == ']') { // trailing comma
                        advance();
                        break;
                    }
                    continue;
                }
                if (peek() == ']') {
                    advance();
                    break;
                }
                fail("expected ',' or ']' in array");
            }
        } else if (src.compare(pos, 4, "true") == 0) {
            v.kind = TomlValue::Kind::Bool;
            v.boolean = true;
            for (int i = 0; i < 4; ++i) advance();
        } else if (src.compare(pos, 5, "false") == 0) {
            v.kind = TomlValue::Kind::Bool;
            v.boolean = false;
            for (int i = 0; i < 5; ++i) advance();
        } else {
            // number
            std::string tok;
            while (pos < src.size()) {
                const char ch = peek();
                if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '+' || ch == '-' ||
                    ch == '.' || ch == 'e' || ch == 'E') {
                    tok += advance();
                } else {
                    break;
                }
            }
            if (tok.empty()) fail("expected a value");
            try {
                size_t used = 0;
                v.num = std::stod(tok, &used);
                if (used != tok.size()) fail("malformed number '" + tok + "'");
            } catch (const std::exception&) {
                fail("malformed number '" + tok + "'");
            }
            v.kind = TomlValue::Kind::Number;
        }
        return v;
    }

    void parse() {
        std::string section;
        while (true) {
            skip_ws_and_comments(false);
            if (pos >= src.size()) break;
            if (peek() == '[') {
                advance();
                section.clear();
                section = parse_bare_key();
                while (peek() == '.') {
                    advance();
                    section += "." + parse_bare_key();
                }
                if (peek() != ']') fail("expected ']' after section name");
                advance();
                continue;
            }
            const int kline = line, kcol = col;
            const std::string key = parse_bare_key();
            skip_ws_and_comments(true);
            if (peek() != '=') fail("expected '=' after key '" + key + "'");
            advance();
            TomlValue v = parse_value();
            v.line = kline;
            v.col = kcol;
            const std::string full = section.empty() ? key : section + "." + key;
            if (values.count(full)) fail("duplicate key '" + full + "'");
            values.emplace(full, std::move(v));
        }
    }
};

double need_number(const TomlValue& v, const std::string& key) {
    if (v.kind != TomlValue::Kind::Number)
        throw ConfigError("cli", "key '" + key + "' (line " + std::to_string(v.line) +
                                     ") must be a number");
    return v.num;
}

std::string need_string(const TomlValue& v, const std::string& key) {
    if (v.kind != TomlValue::Kind::String)
        throw ConfigError("cli", "key '" + key + "' (line " + std::to_string(v.line) +
                                     ") must be a string");
    return v.str;
}

std::vector<double> need_number_array(const TomlValue& v, const std::string& key) {
    if (v.kind != TomlValue::Kind::Array)
        throw ConfigError("cli", "key '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v.arr) out.push_back(need_number(e, key));
    return out;
}

const std::set<std::string> kKnownKeys = {
    "geometry.l",          "geometry.k",           "geometry.alpha",
    "geometry.theta",      "geometry.k_file",      "geometry.alpha_file",
    "geometry.theta_file", "geometry.n_samples",   "cross_section.domain",
    "cross_section.radius", "cross_section.vertices", "cross_section.resolution",
    "cross_section.order", "coefficient.kind",     "coefficient.expr",
    "coefficient.grid_file", "coefficient.cell_resolution", "run.mode",
    "run.eigenpairs",      "run.scales",           "run.verify_case",
    "run.s",               "run.oracle_ns",        "run.oracle_nx",
    "run.concentration_s0", "output.directory",    "output.formats"};

} // namespace

RunConfig parse_config(const std::string& toml_text, const std::string& mode_override) {
    TomlParser parser(toml_text);
    parser.parse();

    for (const auto& [key, v] : parser.values)
        if (!kKnownKeys.count(key))
            throw ConfigError("cli", "unknown key '" + key + "' at line " +
                                         std::to_string(v.line));

    RunConfig c;
    auto get = [&](const std::string& key) -> const TomlValue* {
        auto it = parser.values.find(key);
        return it == parser.values.end() ? nullptr : &it->second;
    };

    if (auto v = get("geometry.l")) c.l = need_number(*v, "geometry.l");
    if (auto v = get("geometry.k")) c.k = need_string(*v, "geometry.k");
    if (auto v = get("geometry.alpha")) c.alpha = need_string(*v, "geometry.alpha");
    if (auto v = get("geometry.theta")) c.theta = need_string(*v, "geometry.theta");
    if (auto v = get("geometry.k_file")) c.k_file = need_string(*v, "geometry.k_file");
    if (auto v = get("geometry.alpha_file")) c.alpha_file = need_string(*v, "geometry.alpha_file");
    if (auto v = get("geometry.theta_file")) c.theta_file = need_string(*v, "geometry.theta_file");
    if (auto v = get("geometry.n_samples"))
        c.n_samples = static_cast<int>(need_number(*v, "geometry.n_samples"));

    if (auto v = get("cross_section.domain")) c.domain = need_string(*v, "cross_section.domain");
    if (auto v = get("cross_section.radius")) c.radius = need_number(*v, "cross_section.radius");
    if (auto v = get("cross_section.resolution"))
        c.resolution = static_cast<int>(need_number(*v, "cross_section.resolution"));
    if (auto v = get("cross_section.order")) c.order = need_string(*v, "cross_section.order");
    if (auto v = get("cross_section.vertices")) {
        if (v->kind != TomlValue::Kind::Array)
            throw ConfigError("cli", "cross_section.vertices must be an array of [x, y] pairs");
        for (const auto& pair : v->arr) {
            const auto p = need_number_array(pair, "cross_section.vertices");
            if (p.size() != 2)
                throw ConfigError("cli", "cross_section.vertices entries must have 2 components");
            c.vertices.push_back({p[0], p[1]});
        }
    }

    if (auto v = get("coefficient.kind")) c.kind = need_string(*v, "coefficient.kind");
    if (auto v = get("coefficient.expr")) c.expr = need_string(*v, "coefficient.expr");
    if (auto v = get("coefficient.grid_file"))
        c.grid_file = need_string(*v, "coefficient.grid_file");
    if (auto v = get("coefficient.cell_resolution"))
        c.cell_resolution = static_cast<int>(need_number(*v, "coefficient.cell_resolution"));

    if (auto v = get("run.mode")) c.mode = need_string(*v, "run.mode");
    if (auto v = get("run.eigenpairs"))
        c.eigenpairs = static_cast<int>(need_number(*v, "run.eigenpairs"));
    if (auto v = get("run.scales")) c.scales = need_number_array(*v, "run.scales");
    if (auto v = get("run.verify_case")) c.verify_case = need_string(*v, "run.verify_case");
    if (auto v = get("run.s")) c.s = need_number(*v, "run.s");
    if (auto v = get("run.oracle_ns"))
        c.oracle_ns = static_cast<int>(need_number(*v, "run.oracle_ns"));
    if (auto v = get("run.oracle_nx"))
        c.oracle_nx = static_cast<int>(need_number(*v, "run.oracle_nx"));
    if (auto v = get("run.concentration_s0"))
        c.concentration_s0 = need_number(*v, "run.concentration_s0");

    if (auto v = get("output.directory")) c.directory = need_string(*v, "output.directory");
    if (auto v = get("output.formats")) {
        c.formats.clear();
        for (const auto& e : v->arr) c.formats.push_back(need_string(e, "output.formats"));
    }

    // ---- validation -------------------------------------------------------
    if (!mode_override.empty()) c.mode = mode_override;
    if (c.mode.empty()) throw ConfigError("cli", "missing required field run.mode");
    const std::set<std::string> modes{"homogenize", "effective", "localize", "verify", "oracle"};
    if (!modes.count(c.mode)) throw ConfigError("cli", "invalid run.mode '" + c.mode + "'");
    if (!(c.l > 0)) throw ConfigError("cli", "geometry.l must be positive");
    if (c.n_samples < 2) throw ConfigError("cli", "geometry.n_samples must be at least 2");
    if (c.order != "P1" && c.order != "P2")
        throw ConfigError("cli", "cross_section.order must be P1 or P2");
    if (c.domain != "unit_square" && c.domain != "disk" && c.domain != "polygon")
        throw ConfigError("cli", "cross_section.domain must be unit_square, disk or polygon");
    if (c.domain == "polygon" && c.vertices.size() < 3)
        throw ConfigError("cli", "polygon domain needs cross_section.vertices");
    if (c.eigenpairs < 1) throw ConfigError("cli", "run.eigenpairs must be at least 1");

    const bool needs_coeff = true; // every mode solves with a coefficient
    if (needs_coeff) {
        if (c.kind.empty())
            throw ConfigError("cli", "missing [coefficient] block for mode '" + c.mode + "'");
        if (c.kind != "periodic_cell" && c.kind != "cross_section")
            throw ConfigError("cli", "coefficient.kind must be periodic_cell or cross_section");
        if (c.expr.empty() == c.grid_file.empty())
            throw ConfigError("cli",
                              "coefficient needs exactly one of expr or grid_file");
    }
    if (c.mode == "homogenize" && c.kind != "periodic_cell")
        throw ConfigError("cli", "mode homogenize requires coefficient.kind = periodic_cell");
    if (c.mode == "localize" && c.kind != "cross_section")
        throw ConfigError("cli", "mode localize requires coefficient.kind = cross_section");
    if (c.mode == "verify") {
        const std::set<std::string> cases{"beta_only", "homogenize_only", "combined"};
        if (!cases.count(c.verify_case))
            throw ConfigError("cli", "invalid run.verify_case '" + c.verify_case + "'");
        if (c.verify_case == "beta_only" && c.kind != "cross_section")
            throw ConfigError("cli", "beta_only study needs a cross_section coefficient");
        if (c.verify_case != "beta_only" && c.kind != "periodic_cell")
            throw ConfigError("cli", "homogenization studies need a periodic_cell coefficient");
    }
    if ((c.mode == "verify" || c.mode == "oracle" || c.mode == "effective") && c.scales.empty()) {
        if (c.mode != "effective")
            throw ConfigError("cli", "mode '" + c.mode + "' requires run.scales");
    }
    return c;
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "[geometry]\n";
    out << "l = " << num(c.l) << "\n";
    out << "k = \"" << c.k << "\"\n";
    out << "alpha = \"" << c.alpha << "\"\n";
    out << "theta = \"" << c.theta << "\"\n";
    if (!c.k_file.empty()) out << "k_file = \"" << c.k_file << "\"\n";
    if (!c.alpha_file.empty()) out << "alpha_file = \"" << c.alpha_file << "\"\n";
    if (!c.theta_file.empty()) out << "theta_file = \"" << c.theta_file << "\"\n";
    out << "n_samples = " << c.n_samples << "\n";
    out << "\n[cross_section]\n";
    out << "domain = \"" << c.domain << "\"\n";
    out << "radius = " << num(c.radius) << "\n";
    if (!c.vertices.empty()) {
        out << "vertices = [";
        for (size_t i = 0; i < c.vertices.size(); ++i) {
            out << (i ? ", [" : "[") << num(c.vertices[i][0]) << ", " << num(c.vertices[i][1])
                << "]";
        }
        out << "]\n";
    }
    out << "resolution = " << c.resolution << "\n";
    out << "order = \"" << c.order << "\"\n";
    out << "\n[coefficient]\n";
    if (!c.kind.empty()) out << "kind = \"" << c.kind << "\"\n";
    if (!c.expr.empty()) out << "expr = \"" << c.expr << "\"\n";
    if (!c.grid_file.empty()) out << "grid_file = \"" << c.grid_file << "\"\n";
    out << "cell_resolution = " << c.cell_resolution << "\n";
    out << "\n[run]\n";
    out << "mode = \"" << c.mode << "\"\n";
    out << "eigenpairs = " << c.eigenpairs << "\n";
    if (!c.scales.empty()) {
        out << "scales = [";
        for (size_t i = 0; i < c.scales.size(); ++i) out << (i ? ", " : "") << num(c.scales[i]);
        out << "]\n";
    }
    out << "verify_case = \"" << c.verify_case << "\"\n";
    out << "s = " << num(c.s) << "\n";
    out << "oracle_ns = " << c.oracle_ns << "\n";
    out << "oracle_nx = " << c.oracle_nx << "\n";
    out << "concentration_s0 = " << num(c.concentration_s0) << "\n";
    out << "\n[output]\n";
    out << "directory = \"" << c.directory << "\"\n";
    out << "formats = [";
    for (size_t i = 0; i < c.formats.size(); ++i)
        out << (i ? ", \"" : "\"") << c.formats[i] << "\"";
    out << "]\n";
    return out.str();
}

std::string config_hash(const RunConfig& config) {
    // the hash identifies the scientific run, not where it lands on disk
    RunConfig normalized = config;
    normalized.directory.clear();
    const std::string text = serialize_config(normalized);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace wgspec
