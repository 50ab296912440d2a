#include "lvnd/scenario.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

#include "lvnd/error.hpp"
#include "lvnd/expression.hpp"

namespace lvnd {

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string Scenario::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

namespace {

enum class Kind { Number, Integer, String, Bool, NumberArray, IntArray };

using Value = std::variant<double, std::string, bool, std::vector<double>>;

struct Entry {
    Value value;
    int line = 0;
};

const std::map<std::string, std::map<std::string, Kind>>& schema() {
    static const std::map<std::string, std::map<std::string, Kind>> s = [] {
        std::map<std::string, std::map<std::string, Kind>> m;
        m["grid"] = {{"dimension", Kind::Integer},
                     {"extents", Kind::NumberArray},
                     {"nodes", Kind::IntArray},
                     {"regime", Kind::String}};
        m["kernel"] = {{"radius", Kind::Number}, {"profile", Kind::String}};
        auto& sys = m["system"];
        sys = {{"nu1", Kind::Number}, {"nu2", Kind::Number}, {"period", Kind::Number}};
        for (const char* c : {"a1", "a2", "b1", "b2", "c1", "c2"}) {
            sys[c] = Kind::String;
            sys[std::string(c) + "_bounds"] = Kind::NumberArray;
        }
        m["run"] = {{"dt", Kind::Number},           {"max_periods", Kind::Integer}, {"tolerance", Kind::Number},
                    {"slices", Kind::Integer},      {"horizon", Kind::Number},      {"samples", Kind::Integer},
                    {"extinction_tol", Kind::Number}, {"epsilon", Kind::Number},    {"seed", Kind::Integer},
                    {"u0", Kind::String},           {"v0", Kind::String},           {"extinct", Kind::String}};
        m["spectrum"] = {{"l", Kind::String}, {"nu", Kind::Number}};
        auto& pl = m["planar"];
        pl = {{"steps", Kind::Integer}};
        for (const char* c : {"a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2"}) pl[c] = Kind::String;
        return m;
    }();
    return s;
}

class Parser {
public:
    Parser(const std::string& text, std::string name) : text_(text), name_(std::move(name)) {}

    std::map<std::string, std::map<std::string, Entry>> parse() {
        std::istringstream in(text_);
        std::string raw;
        int line_no = 0;
        std::string section;
        std::map<std::string, std::map<std::string, Entry>> out;
        while (std::getline(in, raw)) {
            ++line_no;
            line_ = line_no;
            const std::string line = trim(strip_comment(raw));
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') fail("malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                if (schema().count(section) == 0) fail("unknown section [" + section + "]");
                if (out.count(section) != 0) fail("duplicate section [" + section + "]");
                out[section];
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) fail("expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string rhs = trim(line.substr(eq + 1));
            if (section.empty()) fail("key '" + key + "' outside of a section");
            const auto& keys = schema().at(section);
            const auto it = keys.find(key);
            if (it == keys.end()) fail("unknown key '" + key + "' in [" + section + "]");
            if (out[section].count(key) != 0) fail("duplicate key '" + key + "' in [" + section + "]");
            out[section][key] = Entry{parse_value(rhs, it->second, key), line_no};
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError(name_ + ":" + std::to_string(line_) + ": " + what);
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t a = 0;
        std::size_t b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    static std::string strip_comment(const std::string& s) {
        bool quoted = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
            if (s[i] == '#' && !quoted) return s.substr(0, i);
        }
        return s;
    }

    double parse_number(const std::string& s, const std::string& key) const {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            fail("key '" + key + "': expected a number, got '" + s + "'");
        }
        if (used != s.size()) fail("key '" + key + "': trailing characters in '" + s + "'");
        return v;
    }

    Value parse_value(const std::string& s, Kind kind, const std::string& key) const {
        if (s.empty()) fail("key '" + key + "' has no value");
        switch (kind) {
            case Kind::String: {
                if (s.size() < 2 || s.front() != '"' || s.back() != '"') fail("key '" + key + "': expected a quoted string");
                std::string v;
                for (std::size_t i = 1; i + 1 < s.size(); ++i) {
                    if (s[i] == '\\' && i + 2 < s.size()) ++i;
                    v += s[i];
                }
                return v;
            }
            case Kind::Bool:
                if (s == "true") return true;
                if (s == "false") return false;
                fail("key '" + key + "': expected true or false");
            case Kind::Number:
                return parse_number(s, key);
            case Kind::Integer: {
                const double v = parse_number(s, key);
                if (v != static_cast<double>(static_cast<long long>(v))) fail("key '" + key + "': expected an integer");
                return v;
            }
            case Kind::NumberArray:
            case Kind::IntArray: {
                if (s.front() != '[' || s.back() != ']') fail("key '" + key + "': expected an array [ ... ]");
                std::vector<double> items;
                std::stringstream body(s.substr(1, s.size() - 2));
                std::string item;
                while (std::getline(body, item, ',')) {
                    item = trim(item);
                    if (item.empty()) continue;
                    const double v = parse_number(item, key);
                    if (kind == Kind::IntArray && v != static_cast<double>(static_cast<long long>(v))) {
                        fail("key '" + key + "': expected integers");
                    }
                    items.push_back(v);
                }
                return items;
            }
        }
        fail("key '" + key + "': unsupported value");
    }

    const std::string& text_;
    std::string name_;
    int line_ = 0;
};

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& name) {
    Parser parser(text, name);
    const auto doc = parser.parse();

    Scenario sc;
    sc.name = name;
    sc.text = text;
    sc.hash = fnv1a(text);

    auto fail_at = [&](int line, const std::string& what) -> void {
        throw ValidationError(name + ":" + std::to_string(line) + ": " + what);
    };
    auto missing = [&](const std::string& section, const std::string& key) -> void {
        throw ValidationError(name + ": missing key '" + key + "' in [" + section + "]");
    };
    auto find = [&](const std::string& section, const std::string& key) -> const Entry* {
        const auto s = doc.find(section);
        if (s == doc.end()) return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    };
    auto need = [&](const std::string& section, const std::string& key) -> const Entry& {
        const Entry* e = find(section, key);
        if (e == nullptr) missing(section, key);
        return *e;
    };
    auto number = [](const Entry& e) { return std::get<double>(e.value); };
    auto string = [](const Entry& e) { return std::get<std::string>(e.value); };
    auto array = [](const Entry& e) { return std::get<std::vector<double>>(e.value); };

    // [grid]
    if (const Entry* e = find("grid", "dimension")) sc.dimension = static_cast<int>(number(*e));
    {
        const Entry& e = need("grid", "extents");
        sc.extents = array(e);
        if (static_cast<int>(sc.extents.size()) != sc.dimension) fail_at(e.line, "extents must have one entry per dimension");
    }
    {
        const Entry& e = need("grid", "nodes");
        for (double v : array(e)) sc.nodes.push_back(static_cast<int>(v));
        if (static_cast<int>(sc.nodes.size()) != sc.dimension) fail_at(e.line, "nodes must have one entry per dimension");
    }
    {
        const Entry& e = need("grid", "regime");
        try {
            sc.regime = parse_regime(string(e));
        } catch (const ValidationError& err) {
            fail_at(e.line, err.what());
        }
    }

    // [kernel]
    sc.radius = number(need("kernel", "radius"));
    if (const Entry* e = find("kernel", "profile")) {
        try {
            sc.profile = parse_kernel_profile(string(*e));
        } catch (const ValidationError& err) {
            fail_at(e->line, err.what());
        }
    }

    // [system]
    sc.nu1 = number(need("system", "nu1"));
    sc.nu2 = number(need("system", "nu2"));
    sc.period = number(need("system", "period"));
    for (const char* c : {"a1", "a2", "b1", "b2", "c1", "c2"}) {
        sc.coefficients[c] = string(need("system", c));
        if (const Entry* e = find("system", std::string(c) + "_bounds")) {
            const auto v = array(*e);
            if (v.size() != 2 || v[0] > v[1]) fail_at(e->line, std::string(c) + "_bounds must be [L, M] with L <= M");
            sc.declared_bounds[c] = Range{v[0], v[1]};
        }
    }

    // [run]
    if (const Entry* e = find("run", "dt")) sc.run.dt = number(*e);
    if (const Entry* e = find("run", "max_periods")) sc.run.max_periods = static_cast<long>(number(*e));
    if (const Entry* e = find("run", "tolerance")) sc.run.tolerance = number(*e);
    if (const Entry* e = find("run", "slices")) sc.run.slices = static_cast<int>(number(*e));
    if (const Entry* e = find("run", "horizon")) sc.run.horizon = number(*e);
    if (const Entry* e = find("run", "samples")) sc.run.samples = static_cast<int>(number(*e));
    if (const Entry* e = find("run", "extinction_tol")) sc.run.extinction_tol = number(*e);
    if (const Entry* e = find("run", "epsilon")) sc.run.epsilon = number(*e);
    if (const Entry* e = find("run", "seed")) sc.run.seed = static_cast<std::uint64_t>(number(*e));
    if (const Entry* e = find("run", "u0")) sc.run.u0 = string(*e);
    if (const Entry* e = find("run", "v0")) sc.run.v0 = string(*e);
    if (const Entry* e = find("run", "extinct")) {
        sc.run.extinct = string(*e);
        if (sc.run.extinct != "u" && sc.run.extinct != "v") fail_at(e->line, "extinct must be \"u\" or \"v\"");
    }
    if (sc.run.max_periods < 1) throw ValidationError(name + ": run.max_periods must be positive");
    if (sc.run.slices < 16) throw ValidationError(name + ": run.slices must be at least 16");
    if (sc.run.samples < 1) throw ValidationError(name + ": run.samples must be positive");

    // [spectrum]
    if (const Entry* e = find("spectrum", "l")) sc.spectrum.l = string(*e);
    if (const Entry* e = find("spectrum", "nu")) sc.spectrum.nu = number(*e);

    // [planar]
    if (doc.count("planar") != 0) {
        Scenario::Planar p;
        for (const char* c : {"a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2"}) p.coefficients[c] = string(need("planar", c));
        if (const Entry* e = find("planar", "steps")) p.steps = static_cast<int>(number(*e));
        sc.planar = std::move(p);
    }

    // Expressions must parse; report the key's line on failure.
    const auto constants = sc.constants();
    for (const auto& [section, keys] : doc) {
        for (const auto& [key, entry] : keys) {
            const bool expression = (section == "system" && sc.coefficients.count(key) != 0) ||
                                    (section == "planar" && key != "steps") || (section == "spectrum" && key == "l") ||
                                    (section == "run" && (key == "u0" || key == "v0"));
            if (!expression) continue;
            try {
                (void)Expression::parse(std::get<std::string>(entry.value), constants);
            } catch (const ValidationError& err) {
                fail_at(entry.line, "key '" + key + "': " + err.what());
            }
        }
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

std::map<std::string, double> Scenario::constants() const {
    std::map<std::string, double> c{{"T", period}};
    if (!extents.empty()) c["Lx"] = extents[0];
    c["Ly"] = extents.size() > 1 ? extents[1] : 0.0;
    return c;
}

Grid Scenario::build_grid() const {
    return lvnd::build_grid(dimension, extents, nodes, regime);
}

std::shared_ptr<const DispersalOperator> Scenario::build_dispersal(const Grid& grid) const {
    const Kernel kernel = build_kernel(grid, radius, profile);
    return std::make_shared<const DispersalOperator>(assemble_dispersal(grid, kernel, regime));
}

CoefficientField Scenario::field(const Grid& grid, const std::string& expression) const {
    return CoefficientField::from_expression(grid, period, Expression::parse(expression, constants()));
}

SystemSpec Scenario::build_system() const {
    Grid grid = build_grid();
    auto op = build_dispersal(grid);
    CoefficientSet set{field(grid, coefficients.at("a1")), field(grid, coefficients.at("a2")),
                       field(grid, coefficients.at("b1")), field(grid, coefficients.at("b2")),
                       field(grid, coefficients.at("c1")), field(grid, coefficients.at("c2"))};
    return make_system(std::move(grid), std::move(op), nu1, nu2, std::move(set));
}

CoefficientBounds Scenario::bounds(const SystemSpec& spec, int time_samples) const {
    CoefficientBounds b = compute_bounds(spec.coefficients, time_samples);
    auto apply = [&](const char* key, Range& r) {
        const auto it = declared_bounds.find(key);
        if (it != declared_bounds.end()) r = it->second;
    };
    apply("a1", b.a1);
    apply("a2", b.a2);
    apply("b1", b.b1);
    apply("b2", b.b2);
    apply("c1", b.c1);
    apply("c2", b.c2);
    return b;
}

StateField Scenario::initial_state(const Grid& grid) const {
    StateField s;
    s.u = field(grid, run.u0).at(0.0);
    s.v = field(grid, run.v0).at(0.0);
    s.t = 0.0;
    if (!s.nonnegative()) throw ValidationError(name + ": initial data u0, v0 must be nonnegative");
    return s;
}

ForcedPlanarSystem Scenario::build_planar() const {
    if (!planar) throw ValidationError(name + ": scenario has no [planar] section");
    const auto c = constants();
    std::array<Expression, 8> e;
    const char* keys[] = {"a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2"};
    for (std::size_t i = 0; i < 8; ++i) {
        e[i] = Expression::parse(planar->coefficients.at(keys[i]), c);
        if (e[i].depends_on_space()) {
            throw ValidationError(name + ": planar coefficient " + keys[i] + " must depend on t only");
        }
    }
    return ForcedPlanarSystem::tabulate(
        period,
        [&e](double t) {
            std::array<double, 8> v{};
            for (std::size_t i = 0; i < 8; ++i) v[i] = e[i](t, 0.0, 0.0);
            return v;
        },
        planar->steps);
}

}  // namespace lvnd
