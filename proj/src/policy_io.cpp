#include "mecsim/policy_io.hpp"

#include "mecsim/errors.hpp"

#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mecsim {

namespace {

constexpr const char* kMagic = "mecsim-policy";
constexpr int kVersion = 1;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Reader {
public:
    explicit Reader(std::istream& is) : is_(is) {}

    /// Next non-empty line split into tokens; the first must equal `tag`.
    std::vector<std::string> expect(const std::string& tag) {
        std::string line;
        while (std::getline(is_, line)) {
            ++line_no_;
            std::istringstream ss(line);
            std::vector<std::string> tok;
            for (std::string t; ss >> t;) tok.push_back(t);
            if (tok.empty()) continue;
            if (tok.front() != tag) fail("expected '" + tag + "', found '" + tok.front() + "'");
            return tok;
        }
        fail("unexpected end of file, expected '" + tag + "'");
    }

    double number(const std::string& s) {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0' || errno == ERANGE) fail("bad number '" + s + "'");
        return v;
    }

    std::uint64_t integer(const std::string& s) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0') fail("bad integer '" + s + "'");
        return v;
    }

    std::uint64_t hex(const std::string& s) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s.c_str(), &end, 16);
        if (end == s.c_str() || *end != '\0') fail("bad hash '" + s + "'");
        return v;
    }

    void arity(const std::vector<std::string>& tok, std::size_t n) {
        if (tok.size() != n) fail("'" + tok.front() + "' expects " + std::to_string(n - 1) + " fields");
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw ConfigError("policy line " + std::to_string(line_no_) + ": " + msg);
    }

private:
    std::istream& is_;
    int line_no_ = 0;
};

void save_tabular(const TabularModel& m, std::ostream& os) {
    os << "bins " << m.encoder.bins() << "\n";
    os << "actions " << m.table.actions() << "\n";
    const auto& edges = m.encoder.edges();
    for (std::size_t c = 0; c < edges.size(); ++c) {
        os << "edges " << c << " " << edges[c].size();
        for (double e : edges[c]) os << " " << fmt(e);
        os << "\n";
    }
    const auto entries = m.table.entries();
    os << "entries " << entries.size() << "\n";
    for (const auto& [s, a, v] : entries) os << "q " << s << " " << a << " " << fmt(v) << "\n";
}

void save_approx(const ApproxModel& m, std::ostream& os) {
    os << "uavs " << m.uavs << "\n";
    os << "vessels " << m.vessels << "\n";
    os << "shape " << m.weights.layers.size();
    for (const auto& l : m.weights.layers) os << " " << l.in << "x" << l.out;
    os << "\n";
    os << "maxima";
    for (double v : m.encoder.maxima()) os << " " << fmt(v);
    os << "\n";
    for (std::size_t li = 0; li < m.weights.layers.size(); ++li) {
        const auto& l = m.weights.layers[li];
        for (std::size_t r = 0; r < l.out; ++r) {
            for (std::size_t c = 0; c < l.in; ++c) {
                os << "w " << li << " " << r << " " << c << " " << fmt(l.w[r * l.in + c]) << "\n";
            }
        }
        for (std::size_t r = 0; r < l.out; ++r) os << "b " << li << " " << r << " " << fmt(l.b[r]) << "\n";
    }
}

TabularModel load_tabular(Reader& rd) {
    auto tok = rd.expect("bins");
    rd.arity(tok, 2);
    const auto bins = static_cast<int>(rd.integer(tok[1]));
    tok = rd.expect("actions");
    rd.arity(tok, 2);
    const auto actions = rd.integer(tok[1]);
    if (actions == 0) rd.fail("actions must be positive");
    TabularModel m{TabularEncoder(bins), QTable(actions)};
    std::array<std::vector<double>, kStateComponents> edges;
    for (std::size_t c = 0; c < kStateComponents; ++c) {
        tok = rd.expect("edges");
        if (tok.size() < 3 || rd.integer(tok[1]) != c) rd.fail("edges out of order");
        const auto n = rd.integer(tok[2]);
        rd.arity(tok, 3 + n);
        for (std::size_t k = 0; k < n; ++k) edges[c].push_back(rd.number(tok[3 + k]));
    }
    m.encoder.set_edges(std::move(edges));
    tok = rd.expect("entries");
    rd.arity(tok, 2);
    const auto n = rd.integer(tok[1]);
    for (std::uint64_t k = 0; k < n; ++k) {
        tok = rd.expect("q");
        rd.arity(tok, 4);
        const auto a = rd.integer(tok[2]);
        if (a >= actions) rd.fail("action index out of range");
        m.table.set(rd.integer(tok[1]), a, rd.number(tok[3]));
    }
    return m;
}

ApproxModel load_approx(Reader& rd) {
    ApproxModel m;
    auto tok = rd.expect("uavs");
    rd.arity(tok, 2);
    m.uavs = rd.integer(tok[1]);
    tok = rd.expect("vessels");
    rd.arity(tok, 2);
    m.vessels = rd.integer(tok[1]);
    tok = rd.expect("shape");
    if (tok.size() < 2) rd.fail("shape needs a layer count");
    const auto layers = rd.integer(tok[1]);
    rd.arity(tok, 2 + layers);
    for (std::size_t li = 0; li < layers; ++li) {
        const auto& s = tok[2 + li];
        const auto x = s.find('x');
        if (x == std::string::npos) rd.fail("bad layer shape '" + s + "'");
        DenseLayer l;
        l.in = rd.integer(s.substr(0, x));
        l.out = rd.integer(s.substr(x + 1));
        l.w.assign(l.in * l.out, 0.0);
        l.b.assign(l.out, 0.0);
        m.weights.layers.push_back(std::move(l));
    }
    tok = rd.expect("maxima");
    rd.arity(tok, 1 + kStateComponents);
    StateComponents mx{};
    for (std::size_t c = 0; c < kStateComponents; ++c) mx[c] = rd.number(tok[1 + c]);
    m.encoder.set_maxima(mx);
    for (std::size_t li = 0; li < m.weights.layers.size(); ++li) {
        auto& l = m.weights.layers[li];
        for (std::size_t r = 0; r < l.out; ++r) {
            for (std::size_t c = 0; c < l.in; ++c) {
                tok = rd.expect("w");
                rd.arity(tok, 5);
                if (rd.integer(tok[1]) != li || rd.integer(tok[2]) != r || rd.integer(tok[3]) != c) {
                    rd.fail("weights out of order");
                }
                l.w[r * l.in + c] = rd.number(tok[4]);
            }
        }
        for (std::size_t r = 0; r < l.out; ++r) {
            tok = rd.expect("b");
            rd.arity(tok, 4);
            if (rd.integer(tok[1]) != li || rd.integer(tok[2]) != r) rd.fail("biases out of order");
            l.b[r] = rd.number(tok[3]);
        }
    }
    m.weights.validate();
    if (m.weights.input_size() != m.input_size()) rd.fail("network input does not match uavs/vessels");
    return m;
}

} // namespace

void save_policy(const Policy& policy, std::ostream& os) {
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, policy.config_hash);
    os << kMagic << " " << kVersion << "\n";
    os << "kind " << (policy.kind() == AgentKind::tabular ? "tabular" : "approx") << "\n";
    os << "config_hash " << hash << "\n";
    if (const auto* tab = std::get_if<TabularModel>(&policy.model)) {
        save_tabular(*tab, os);
    } else {
        save_approx(std::get<ApproxModel>(policy.model), os);
    }
}

Policy load_policy(std::istream& is) {
    Reader rd(is);
    auto tok = rd.expect(kMagic);
    rd.arity(tok, 2);
    if (rd.integer(tok[1]) != kVersion) rd.fail("unsupported version " + tok[1]);
    tok = rd.expect("kind");
    rd.arity(tok, 2);
    AgentKind kind;
    try {
        kind = parse_agent_kind(tok[1]);
    } catch (const ConfigError&) {
        rd.fail("unknown kind '" + tok[1] + "'");
    }
    if (!is_learning(kind)) rd.fail("kind '" + tok[1] + "' has no policy");
    Policy p;
    tok = rd.expect("config_hash");
    rd.arity(tok, 2);
    p.config_hash = rd.hex(tok[1]);
    if (kind == AgentKind::tabular) {
        p.model = load_tabular(rd);
    } else {
        p.model = load_approx(rd);
    }
    return p;
}

void save_policy_file(const Policy& policy, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write policy file '" + path + "'");
    save_policy(policy, os);
    if (!os) throw ConfigError("error writing policy file '" + path + "'");
}

Policy load_policy_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open policy file '" + path + "'");
    return load_policy(is);
}

} // namespace mecsim
