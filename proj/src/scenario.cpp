#include "predictorlab/scenario.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "predictorlab/errors.hpp"
#include "toml.hpp"

namespace predictorlab {

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

// TOML floats need a fraction or exponent to stay floats.
std::string toml_number(double v) {
    std::string s = format_number(v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string toml_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string toml_vector(const Vector& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + toml_number(v(i));
    return out + "]";
}

[[noreturn]] void fail(const std::string& where, const std::string& msg) { throw ConfigError(where + ": " + msg); }

// Typed access to one TOML table that rejects keys nobody asked about.
class Section {
public:
    Section(const toml::table* t, std::string where) : t_(t), where_(std::move(where)) {}

    bool present() const { return t_ != nullptr; }
    const std::string& where() const { return where_; }

    void allow(std::initializer_list<std::string_view> keys) const {
        if (!t_) return;
        std::set<std::string_view> ok(keys);
        for (const auto& [k, v] : *t_) {
            if (!ok.count(k.str())) fail(where_, "unknown key '" + std::string(k.str()) + "'");
        }
    }

    const toml::node* node(std::string_view key) const { return t_ ? t_->get(key) : nullptr; }
    bool has(std::string_view key) const { return node(key) != nullptr; }

    double number(std::string_view key, std::optional<double> def = std::nullopt) const {
        const toml::node* n = node(key);
        if (!n) {
            if (def) return *def;
            fail(where_, "missing key '" + std::string(key) + "'");
        }
        return as_number(*n, key);
    }

    std::int64_t integer(std::string_view key, std::optional<std::int64_t> def = std::nullopt) const {
        const toml::node* n = node(key);
        if (!n) {
            if (def) return *def;
            fail(where_, "missing key '" + std::string(key) + "'");
        }
        if (auto v = n->value_exact<std::int64_t>()) return *v;
        fail(where_, "key '" + std::string(key) + "' must be an integer");
    }

    bool boolean(std::string_view key, bool def) const {
        const toml::node* n = node(key);
        if (!n) return def;
        if (auto v = n->value_exact<bool>()) return *v;
        fail(where_, "key '" + std::string(key) + "' must be a boolean");
    }

    std::string string(std::string_view key, std::optional<std::string> def = std::nullopt) const {
        const toml::node* n = node(key);
        if (!n) {
            if (def) return *def;
            fail(where_, "missing key '" + std::string(key) + "'");
        }
        if (auto v = n->value_exact<std::string>()) return *v;
        fail(where_, "key '" + std::string(key) + "' must be a string");
    }

    Vector vector(std::string_view key) const {
        const toml::node* n = node(key);
        if (!n) fail(where_, "missing key '" + std::string(key) + "'");
        return as_vector(*n, key);
    }

    double as_number(const toml::node& n, std::string_view key) const {
        if (auto v = n.value_exact<double>()) return *v;
        if (auto v = n.value_exact<std::int64_t>()) return static_cast<double>(*v);
        fail(where_, "key '" + std::string(key) + "' must be a number");
    }

    Vector as_vector(const toml::node& n, std::string_view key) const {
        const toml::array* a = n.as_array();
        if (!a || a->empty()) fail(where_, "key '" + std::string(key) + "' must be a non-empty array of numbers");
        Vector v(static_cast<Eigen::Index>(a->size()));
        for (std::size_t i = 0; i < a->size(); ++i) v(static_cast<Eigen::Index>(i)) = as_number((*a)[i], key);
        return v;
    }

private:
    const toml::table* t_;
    std::string where_;
};

Section sub(const toml::table& root, std::string_view key) {
    const toml::node* n = root.get(key);
    if (!n) return {nullptr, std::string(key)};
    if (!n->as_table()) fail(std::string(key), "must be a table");
    return {n->as_table(), std::string(key)};
}

std::vector<std::pair<double, double>> pair_table(const Section& s, const toml::node& n, std::string_view key) {
    const toml::array* a = n.as_array();
    if (!a || a->empty()) fail(s.where(), "key '" + std::string(key) + "' must be a non-empty array of [t, value]");
    std::vector<std::pair<double, double>> rows;
    for (const auto& row : *a) {
        const toml::array* r = row.as_array();
        if (!r || r->size() != 2) fail(s.where(), "key '" + std::string(key) + "' rows must be [t, value]");
        rows.emplace_back(s.as_number((*r)[0], key), s.as_number((*r)[1], key));
    }
    return rows;
}

ExogenousSignal parse_signal(const toml::node& n, const std::string& where) {
    const toml::table* t = n.as_table();
    if (!t) fail(where, "signal must be a table with a 'kind' key");
    Section s(t, where);
    const std::string kind = s.string("kind");
    if (kind == "zero") {
        s.allow({"kind"});
        return ExogenousSignal{};
    }
    if (kind == "constant") {
        s.allow({"kind", "value"});
        return ExogenousSignal::Constant{s.number("value")};
    }
    if (kind == "sinusoid") {
        s.allow({"kind", "amplitude", "frequency", "phase"});
        return ExogenousSignal::Sinusoid{s.number("amplitude"), s.number("frequency", 1.0), s.number("phase", 0.0)};
    }
    if (kind == "piecewise") {
        s.allow({"kind", "table"});
        if (!s.has("table")) fail(where, "missing key 'table'");
        try {
            return ExogenousSignal::PiecewiseConstant{pair_table(s, *s.node("table"), "table")};
        } catch (const InvalidArgument& e) {
            fail(where, e.what());
        }
    }
    if (kind == "noise") {
        s.allow({"kind", "amplitude", "seed", "offset"});
        const auto seed = s.integer("seed", 0);
        if (seed < 0) fail(where, "seed must be non-negative");
        return ExogenousSignal::UniformNoise{s.number("amplitude"), static_cast<std::uint64_t>(seed),
                                             s.number("offset", 0.0)};
    }
    fail(where, "unknown signal kind '" + kind + "'");
}

std::string dump_signal(const ExogenousSignal& sig) {
    std::ostringstream os;
    const auto& k = sig.kind();
    if (std::holds_alternative<ExogenousSignal::Zero>(k)) {
        os << "{ kind = \"zero\" }";
    } else if (auto c = std::get_if<ExogenousSignal::Constant>(&k)) {
        os << "{ kind = \"constant\", value = " << toml_number(c->value) << " }";
    } else if (auto s = std::get_if<ExogenousSignal::Sinusoid>(&k)) {
        os << "{ kind = \"sinusoid\", amplitude = " << toml_number(s->amplitude)
           << ", frequency = " << toml_number(s->frequency) << ", phase = " << toml_number(s->phase) << " }";
    } else if (auto p = std::get_if<ExogenousSignal::PiecewiseConstant>(&k)) {
        os << "{ kind = \"piecewise\", table = [";
        for (std::size_t i = 0; i < p->table.size(); ++i) {
            os << (i ? ", " : "") << "[" << toml_number(p->table[i].first) << ", "
               << toml_number(p->table[i].second) << "]";
        }
        os << "] }";
    } else {
        const auto& n = std::get<ExogenousSignal::UniformNoise>(k);
        os << "{ kind = \"noise\", amplitude = " << toml_number(n.amplitude) << ", seed = " << n.seed
           << ", offset = " << toml_number(n.offset) << " }";
    }
    return os.str();
}

double plant_total_delay(const std::string& name) {
    const AnyPlant p = catalog_get(name);
    return std::visit([](const auto& q) { return q.total_delay(); }, p);
}

Scenario parse_root(const toml::table& root) {
    Section top(&root, "scenario");
    top.allow({"plant", "mode", "seed", "gains", "predictor", "timing", "initial", "signals", "monitors", "conditions",
               "predict", "output", "sweep"});
    Scenario sc;
    SimConfig& c = sc.sim;
    c.plant = top.string("plant");
    double rpt = 0.0;
    try {
        rpt = plant_total_delay(c.plant);
    } catch (const LookupError& e) {
        fail("scenario", e.what());
    }
    const std::string mode = top.string("mode", "approximate");
    if (mode == "approximate") {
        c.mode = PredictorMode::Approximate;
    } else if (mode == "exact-lti") {
        c.mode = PredictorMode::ExactLti;
    } else {
        fail("scenario", "mode must be \"approximate\" or \"exact-lti\"");
    }
    const auto seed = top.integer("seed", 0);
    if (seed < 0) fail("scenario", "seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);

    const Section gains = sub(root, "gains");
    gains.allow({"k", "p", "theta"});
    if (!gains.present()) fail("gains", "table required");
    c.k = gains.vector("k");
    c.p = gains.vector("p");
    c.theta = gains.number("theta", 1.0);

    const Section pred = sub(root, "predictor");
    pred.allow({"l", "m", "nq", "k_hat"});
    c.predictor.l = static_cast<int>(pred.integer("l", 1));
    c.predictor.m = static_cast<int>(pred.integer("m", 2));
    c.predictor.nq = static_cast<int>(pred.integer("nq", 256));
    if (pred.has("k_hat")) {
        sc.k_hat = pred.number("k_hat");
        c.k_hat = *sc.k_hat;
    }

    const Section timing = sub(root, "timing");
    timing.allow({"T1", "T2", "t_end", "h"});
    c.T1 = timing.number("T1", c.T1);
    c.T2 = timing.number("T2", c.T2);
    c.t_end = timing.number("t_end", c.t_end);
    c.h = timing.number("h", c.h);

    const Section init = sub(root, "initial");
    init.allow({"x0", "u0", "z0", "w0"});
    if (!init.present()) fail("initial", "table required");
    c.x0 = init.vector("x0");
    c.z0 = init.has("z0") ? init.vector("z0") : Vector::Zero(c.x0.size());
    c.w0 = init.number("w0", 0.0);
    if (!init.has("u0")) fail("initial", "missing key 'u0'");
    const toml::node& u0 = *init.node("u0");
    if (u0.is_array()) {
        for (const auto& [t, v] : pair_table(init, u0, "u0")) c.u0.push_back({t, v});
    } else {
        c.u0 = {{-rpt, init.as_number(u0, "u0")}};
    }

    const Section sig = sub(root, "signals");
    sig.allow({"d", "xi", "b"});
    if (sig.has("d")) {
        const toml::array* a = sig.node("d")->as_array();
        if (!a) fail("signals", "d must be an array of signal tables");
        for (std::size_t i = 0; i < a->size(); ++i) c.d.push_back(parse_signal((*a)[i], "signals.d"));
    }
    if (sig.has("xi")) c.xi = parse_signal(*sig.node("xi"), "signals.xi");
    if (sig.has("b")) c.b = parse_signal(*sig.node("b"), "signals.b");

    const Section mon = sub(root, "monitors");
    mon.allow({"enabled"});
    c.monitors = mon.boolean("enabled", true);

    const Section cond = sub(root, "conditions");
    cond.allow({"q_scale", "p_scale"});
    sc.q_scale = cond.number("q_scale", 1.0);
    sc.p_scale = cond.number("p_scale", 1.0);
    if (!(sc.q_scale > 0.0) || !(sc.p_scale > 0.0)) fail("conditions", "q_scale and p_scale must be positive");

    const Section pr = sub(root, "predict");
    pr.allow({"state"});
    if (pr.has("state")) sc.predict_state = pr.vector("state");

    const Section out = sub(root, "output");
    out.allow({"trace"});
    if (out.has("trace")) sc.trace_path = out.string("trace");

    const Section sw = sub(root, "sweep");
    if (sw.present()) {
        sw.allow({"criterion", "k_hat", "k_trials", "axis"});
        SweepSpec spec;
        const std::string crit = sw.string("criterion", "auto");
        if (crit == "auto") {
            spec.criterion = SuccessCriterion::Auto;
        } else if (crit == "decay") {
            spec.criterion = SuccessCriterion::DecayFit;
        } else if (crit == "sup") {
            spec.criterion = SuccessCriterion::SupBound;
        } else {
            fail("sweep", "criterion must be \"auto\", \"decay\" or \"sup\"");
        }
        if (sw.has("k_hat")) spec.k_hat = sw.number("k_hat");
        spec.k_trials = static_cast<int>(sw.integer("k_trials", 20));
        if (sw.has("axis")) {
            const toml::array* axes = sw.node("axis")->as_array();
            if (!axes) fail("sweep", "axis must be an array of tables");
            for (const auto& a : *axes) {
                Section as(a.as_table(), "sweep.axis");
                if (!as.present()) fail("sweep.axis", "entries must be tables");
                as.allow({"name", "values"});
                SweepAxisValues ax{};
                try {
                    ax.axis = parse_axis(as.string("name"));
                } catch (const InvalidArgument& e) {
                    fail("sweep.axis", e.what());
                }
                const toml::array* vals = as.node("values") ? as.node("values")->as_array() : nullptr;
                if (!vals) fail("sweep.axis", "values must be an array of numbers");
                for (const auto& v : *vals) ax.values.push_back(as.as_number(v, "values"));
                spec.axes.push_back(std::move(ax));
            }
        }
        spec.base = c;
        sc.sweep = std::move(spec);
    }

    try {
        c.validate();
        if (sc.sweep) {
            sc.sweep->base = c;
            sc.sweep->validate();
        }
    } catch (const ContractionViolated&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail("scenario", e.what());
    }
    return sc;
}

}  // namespace

bool Scenario::operator==(const Scenario& o) const {
    auto same_opt_vec = [](const std::optional<Vector>& a, const std::optional<Vector>& b) {
        if (a.has_value() != b.has_value()) return false;
        return !a || (a->size() == b->size() && *a == *b);
    };
    if (!(sim == o.sim) || k_hat != o.k_hat || q_scale != o.q_scale || p_scale != o.p_scale ||
        !same_opt_vec(predict_state, o.predict_state) || trace_path != o.trace_path ||
        sweep.has_value() != o.sweep.has_value()) {
        return false;
    }
    if (!sweep) return true;
    const SweepSpec& a = *sweep;
    const SweepSpec& b = *o.sweep;
    if (!(a.base == b.base) || a.criterion != b.criterion || a.k_hat != b.k_hat || a.k_trials != b.k_trials ||
        a.axes.size() != b.axes.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.axes.size(); ++i) {
        if (a.axes[i].axis != b.axes[i].axis || a.axes[i].values != b.axes[i].values) return false;
    }
    return true;
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ": " << e.description() << " (line " << e.source().begin.line << ")";
        throw ConfigError(os.str());
    }
    return parse_root(root);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

std::string dump_scenario(const Scenario& s) {
    const SimConfig& c = s.sim;
    std::ostringstream os;
    os << "plant = " << toml_string(c.plant) << "\n";
    os << "mode = " << (c.mode == PredictorMode::Approximate ? "\"approximate\"" : "\"exact-lti\"") << "\n";
    os << "seed = " << c.seed << "\n\n";
    os << "[gains]\nk = " << toml_vector(c.k) << "\np = " << toml_vector(c.p) << "\ntheta = " << toml_number(c.theta)
       << "\n\n";
    os << "[predictor]\nl = " << c.predictor.l << "\nm = " << c.predictor.m << "\nnq = " << c.predictor.nq << "\n";
    if (s.k_hat) os << "k_hat = " << toml_number(*s.k_hat) << "\n";
    os << "\n[timing]\nT1 = " << toml_number(c.T1) << "\nT2 = " << toml_number(c.T2)
       << "\nt_end = " << toml_number(c.t_end) << "\nh = " << toml_number(c.h) << "\n\n";
    os << "[initial]\nx0 = " << toml_vector(c.x0) << "\nu0 = [";
    for (std::size_t i = 0; i < c.u0.size(); ++i) {
        os << (i ? ", " : "") << "[" << toml_number(c.u0[i].start) << ", " << toml_number(c.u0[i].value) << "]";
    }
    os << "]\nz0 = " << toml_vector(c.z0) << "\nw0 = " << toml_number(c.w0) << "\n\n";
    os << "[signals]\nd = [";
    for (std::size_t i = 0; i < c.d.size(); ++i) os << (i ? ", " : "") << dump_signal(c.d[i]);
    os << "]\nxi = " << dump_signal(c.xi) << "\nb = " << dump_signal(c.b) << "\n\n";
    os << "[monitors]\nenabled = " << (c.monitors ? "true" : "false") << "\n\n";
    os << "[conditions]\nq_scale = " << toml_number(s.q_scale) << "\np_scale = " << toml_number(s.p_scale) << "\n";
    if (s.predict_state) os << "\n[predict]\nstate = " << toml_vector(*s.predict_state) << "\n";
    if (s.trace_path) os << "\n[output]\ntrace = " << toml_string(*s.trace_path) << "\n";
    if (s.sweep) {
        const SweepSpec& sw = *s.sweep;
        const char* crit = sw.criterion == SuccessCriterion::Auto       ? "auto"
                           : sw.criterion == SuccessCriterion::DecayFit ? "decay"
                                                                        : "sup";
        os << "\n[sweep]\ncriterion = \"" << crit << "\"\n";
        if (sw.k_hat) os << "k_hat = " << toml_number(*sw.k_hat) << "\n";
        os << "k_trials = " << sw.k_trials << "\n";
        for (const auto& ax : sw.axes) {
            os << "\n[[sweep.axis]]\nname = " << toml_string(axis_name(ax.axis)) << "\nvalues = [";
            for (std::size_t i = 0; i < ax.values.size(); ++i) os << (i ? ", " : "") << toml_number(ax.values[i]);
            os << "]\n";
        }
    }
    return os.str();
}

void write_trace_csv(const SimTrace& trace, std::ostream& os) {
    const int n = trace.n;
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    for (int i = 1; i <= n; ++i) os << ",z" << i;
    os << ",w,u,y,d,xi,m24,m214,m223,m224\r\n";
    std::string line;
    for (const auto& row : trace.rows) {
        line.clear();
        line += format_number(row.t);
        for (int i = 0; i < n; ++i) line += "," + format_number(row.x(i));
        for (int i = 0; i < n; ++i) line += "," + format_number(row.z(i));
        for (double v : {row.w, row.u, row.y, row.d, row.xi, row.m24, row.m214, row.m223, row.m224}) {
            line += "," + format_number(v);
        }
        line += "\r\n";
        os << line;
    }
}

void write_sweep_csv(const SweepResult& result, std::ostream& os) {
    for (auto a : result.axes) os << axis_name(a) << ",";
    os << "success,diverged,decay_rate,r_squared,sup_x";
    std::vector<std::string> ids;
    if (!result.points.empty()) {
        for (const auto& e : result.points.front().conditions.entries) ids.push_back(e.id);
    }
    for (const auto& id : ids) os << ",margin_" << id;
    os << "\r\n";
    for (const auto& p : result.points) {
        for (double v : p.values) os << format_number(v) << ",";
        os << (p.success ? 1 : 0) << "," << (p.diverged ? 1 : 0) << "," << format_number(p.decay_rate) << ","
           << format_number(p.r_squared) << "," << format_number(p.sup_x);
        for (const auto& e : p.conditions.entries) os << "," << format_number(e.margin);
        os << "\r\n";
    }
}

}  // namespace predictorlab
