#include "finsler/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "finsler/fd_oracle.hpp"

namespace finsler::report {

namespace {

/// Minimal JSON emitter with caller-controlled key order and fixed
/// seventeen-significant-digit floats, for byte-stable reports.
class JsonW {
public:
    void begin_object() {
        comma();
        buf_ += '{';
        fresh_.push_back(true);
    }
    void end_object() {
        buf_ += '}';
        fresh_.pop_back();
        mark();
    }
    void begin_array() {
        comma();
        buf_ += '[';
        fresh_.push_back(true);
    }
    void end_array() {
        buf_ += ']';
        fresh_.pop_back();
        mark();
    }
    void key(const std::string& k) {
        comma();
        append_string(k);
        buf_ += ':';
        pending_value_ = true;
    }
    void value(double v) {
        comma();
        char tmp[40];
        if (std::isfinite(v)) {
            std::snprintf(tmp, sizeof(tmp), "%.17g", v);
            buf_ += tmp;
        } else {
            buf_ += "null";
        }
        mark();
    }
    void value(int v) {
        comma();
        buf_ += std::to_string(v);
        mark();
    }
    void value(std::uint64_t v) {
        comma();
        buf_ += std::to_string(v);
        mark();
    }
    void value(bool v) {
        comma();
        buf_ += v ? "true" : "false";
        mark();
    }
    void value(const std::string& v) {
        comma();
        append_string(v);
        mark();
    }
    void value(const char* v) { value(std::string(v)); }

    const std::string& str() const { return buf_; }

private:
    void comma() {
        if (pending_value_) {
            pending_value_ = false;
            return;
        }
        if (!fresh_.empty() && !fresh_.back()) buf_ += ',';
    }
    void mark() {
        if (!fresh_.empty()) fresh_.back() = false;
    }
    void append_string(const std::string& s) {
        buf_ += '"';
        for (char c : s) {
            switch (c) {
                case '"': buf_ += "\\\""; break;
                case '\\': buf_ += "\\\\"; break;
                case '\n': buf_ += "\\n"; break;
                case '\t': buf_ += "\\t"; break;
                case '\r': buf_ += "\\r"; break;
                default: buf_ += c;
            }
        }
        buf_ += '"';
    }

    std::string buf_;
    std::vector<bool> fresh_;
    bool pending_value_ = false;
};

const char* depth_name(geom::Depth d) {
    switch (d) {
        case geom::Depth::Base: return "base";
        case geom::Depth::First: return "first";
        case geom::Depth::Second: return "second";
    }
    return "?";
}

void write_meta(JsonW& w, const RunConfig& cfg, const zoo::FinslerMetric& m,
                const char* command) {
    w.key("meta");
    w.begin_object();
    w.key("tool");
    w.value("finsler");
    w.key("version");
    w.value(kToolVersion);
    w.key("command");
    w.value(command);
    w.key("metric");
    w.value(m.label);
    w.key("family");
    w.value(m.family);
    w.key("n");
    w.value(m.n);
    w.key("points");
    w.value(cfg.points);
    w.key("seed");
    w.value(cfg.seed);
    w.key("order");
    w.value(cfg.order);
    w.key("depth");
    w.value(depth_name(cfg.depth));
    w.key("box_halfwidth");
    w.value(1.0);
    w.key("eps");
    w.begin_object();
    w.key("fit");
    w.value(cfg.eps.fit);
    w.key("deg");
    w.value(cfg.eps.deg);
    w.key("form");
    w.value(cfg.eps.form);
    w.key("gram");
    w.value(cfg.eps.gram);
    w.key("abs");
    w.value(cfg.eps.abs);
    w.end_object();
    w.end_object();
}

void write_points(JsonW& w, const std::vector<geom::TMPoint>& pts) {
    w.key("points");
    w.begin_array();
    for (const auto& p : pts) {
        w.begin_object();
        w.key("x");
        w.begin_array();
        for (double v : p.x) w.value(v);
        w.end_array();
        w.key("y");
        w.begin_array();
        for (double v : p.y) w.value(v);
        w.end_array();
        w.end_object();
    }
    w.end_array();
}

void write_tensors(JsonW& w, const fit::Report& rep) {
    w.key("tensors");
    w.begin_object();
    w.key("per_point");
    w.begin_array();
    for (const auto& t : rep.tensors) {
        w.begin_object();
        w.key("r");
        w.value(t.r);
        w.key("norm_R");
        w.value(t.norm_R);
        w.key("norm_Ric");
        w.value(t.norm_Ric);
        w.key("norm_C");
        w.value(t.norm_C);
        w.key("norm_Rhat");
        w.value(t.norm_Rhat);
        w.key("norm_grad_r");
        w.value(t.norm_dr);
        w.end_object();
    }
    w.end_array();
    w.key("rhat_rel_max");
    w.value(rep.rhat_rel_max);
    w.key("r_abs_min");
    w.value(rep.r_abs_min);
    w.key("r_const_dev");
    w.value(rep.r_const_dev);
    w.end_object();
}

void write_side(JsonW& w, const std::map<std::string, double>& side) {
    w.begin_object();
    for (const auto& [k, v] : side) {
        w.key(k);
        w.value(v);
    }
    w.end_object();
}

void write_verdicts(JsonW& w, const fit::Report& rep,
                    const std::vector<fit::Condition>& conditions) {
    w.key("verdicts");
    w.begin_object();
    for (fit::Condition c : conditions) {
        const auto& cr = rep.at(c);
        w.key(fit::condition_name(c));
        w.begin_object();
        w.key("verdict");
        w.value(fit::verdict_name(cr.verdict));
        w.key("max_residual");
        w.value(cr.max_residual);
        w.key("symmetric");
        w.value(cr.symmetric);
        w.key("per_point");
        w.begin_array();
        for (const auto& pf : cr.points) {
            w.begin_object();
            w.key("verdict");
            w.value(fit::verdict_name(pf.verdict));
            w.key("residual");
            w.value(pf.residual);
            w.key("target_norm");
            w.value(pf.target_norm);
            w.key("symmetric");
            w.value(pf.symmetric);
            w.key("a_zero");
            w.value(pf.a_zero);
            w.key("b_zero");
            w.value(pf.b_zero);
            w.key("A");
            w.begin_array();
            for (double v : pf.A) w.value(v);
            w.end_array();
            w.key("B");
            w.begin_array();
            for (double v : pf.B) w.value(v);
            w.end_array();
            w.key("side");
            write_side(w, pf.side);
            w.end_object();
        }
        w.end_array();
        w.key("side");
        write_side(w, cr.side);
        w.end_object();
    }
    w.end_object();
}

void write_identities(JsonW& w,
                      const std::vector<identities::IdentitySet>& per_point) {
    w.key("identities");
    w.begin_object();
    w.key("per_point");
    w.begin_array();
    for (const auto& set : per_point) {
        w.begin_object();
        for (const auto& [name, res] : set) {
            w.key(name);
            w.begin_object();
            w.key("residual");
            w.value(res.residual);
            w.key("scale");
            w.value(res.scale);
            w.key("applicable");
            w.value(res.applicable);
            w.key("guards");
            write_side(w, res.guards);
            w.end_object();
        }
        w.end_object();
    }
    w.end_array();
    w.end_object();
}

void write_diagram(JsonW& w, const diagram::Evaluation& ev) {
    w.key("diagram");
    w.begin_array();
    for (const auto& oc : ev.outcomes) {
        const diagram::Rule* rule = nullptr;
        for (const auto& r : diagram::rule_table())
            if (r.id == oc.rule_id) rule = &r;
        w.begin_object();
        w.key("rule");
        w.value(oc.rule_id);
        w.key("premise");
        w.value(rule ? fit::condition_name(rule->premise) : "?");
        w.key("conclusion");
        w.value(rule ? fit::condition_name(rule->conclusion) : "?");
        w.key("premise_verdict");
        w.value(fit::verdict_name(oc.premise_verdict));
        w.key("conclusion_verdict");
        w.value(fit::verdict_name(oc.conclusion_verdict));
        w.key("guards_ok");
        w.value(oc.guards_ok);
        w.key("guard_values");
        write_side(w, oc.guard_values);
        w.key("status");
        w.value(diagram::status_name(oc.status));
        w.end_object();
    }
    w.end_array();
}

struct ClassifyData {
    zoo::FinslerMetric metric;
    std::vector<geom::TMPoint> pts;
    fit::Report rep;
    std::vector<identities::IdentitySet> ids;
    diagram::Evaluation ev;
};

ClassifyData run_pipeline(const RunConfig& cfg, bool with_recurrence_ids) {
    ClassifyData out{load_metric(cfg), {}, {}, {}, {}};
    out.pts = sample_points(out.metric, cfg.points, cfg.seed);

    std::vector<std::array<fit::PointFit, fit::kConditionCount>> fits;
    std::vector<fit::PointTensors> tensors;
    for (const auto& p : out.pts) {
        geom::PointFrame f(out.metric, p, geom::Depth::Second, cfg.order);
        std::array<fit::PointFit, fit::kConditionCount> pf;
        fit::classify_point(f, cfg.eps, pf);
        tensors.push_back(fit::point_tensors(f));

        identities::IdentitySet set = identities::structural_residuals(f, cfg.eps);
        if (with_recurrence_ids) {
            auto rec = identities::recurrence_residuals(f, pf, cfg.eps);
            set.insert(rec.begin(), rec.end());
        }
        out.ids.push_back(std::move(set));
        fits.push_back(std::move(pf));
    }
    out.rep = fit::aggregate(out.metric.n, cfg.eps, out.pts, std::move(tensors), std::move(fits));
    out.ev = diagram::evaluate(out.rep, cfg.eps);
    return out;
}

int classify_exit_code(const ClassifyData& d) {
    if (d.ev.any_violation) return 2;
    bool all_degenerate = true;
    for (auto c : fit::all_conditions())
        if (d.rep.at(c).verdict != fit::Verdict::Degenerate) all_degenerate = false;
    return all_degenerate ? 3 : 0;
}

std::string classify_text(const ClassifyData& d) {
    std::ostringstream os;
    os << "metric " << d.metric.label << " (n=" << d.metric.n << ", " << d.pts.size()
       << " points)\n";
    os << "verdicts:\n";
    for (auto c : fit::all_conditions()) {
        const auto& cr = d.rep.at(c);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "  %-5s %-11s residual %.3e", fit::condition_name(c),
                      fit::verdict_name(cr.verdict), cr.max_residual);
        os << buf;
        if (cr.symmetric) os << "  [symmetric]";
        os << "\n";
    }
    os << "diagram:\n";
    for (const auto& oc : d.ev.outcomes) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "  %-28s %s", oc.rule_id.c_str(),
                      diagram::status_name(oc.status));
        os << buf << "\n";
    }
    os << (d.ev.any_violation ? "VIOLATIONS PRESENT\n" : "no violations\n");
    return os.str();
}

}  // namespace

zoo::FinslerMetric load_metric(const RunConfig& cfg) {
    try {
        if (zoo::is_builtin(cfg.metric)) {
            return zoo::build(zoo::builtin_spec(cfg.metric, cfg.n, cfg.kappa));
        }
        std::ifstream in(cfg.metric);
        if (!in) throw MetricLoadError("cannot open metric file '" + cfg.metric + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        auto spec = zoo::parse_metric_file(ss.str());
        return zoo::build(spec);
    } catch (const zoo::MetricError& e) {
        throw MetricLoadError(e.what());
    }
}

std::vector<geom::TMPoint> sample_points(const zoo::FinslerMetric& m, int count,
                                         std::uint64_t seed) {
    if (count < 1) throw SamplingError("at least one sample point is required");
    std::mt19937_64 rng(seed);
    auto uni01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<geom::TMPoint> out;
    long attempts = 0;
    const long max_attempts = 512L * count;
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > max_attempts)
            throw SamplingError("could not sample enough valid domain points");
        geom::TMPoint p;
        p.x.resize(static_cast<std::size_t>(m.n));
        p.y.resize(static_cast<std::size_t>(m.n));
        for (auto& v : p.x) v = uni01() * 2.0 - 1.0;
        double norm = 0.0;
        for (auto& v : p.y) {
            v = uni01() * 2.0 - 1.0;
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-2 || norm > 1.0) continue;  // uniform direction via the ball
        for (auto& v : p.y) v /= norm;
        if (!m.domain(p.x, p.y)) continue;
        auto g = zoo::fundamental_matrix(m, p.x, p.y);
        if (!zoo::positive_definite(g, m.n)) continue;
        out.push_back(std::move(p));
    }
    return out;
}

Document run_classify(const RunConfig& cfg) {
    auto d = run_pipeline(cfg, true);
    JsonW w;
    w.begin_object();
    write_meta(w, cfg, d.metric, "classify");
    write_points(w, d.pts);
    write_tensors(w, d.rep);
    std::vector<fit::Condition> all(fit::all_conditions().begin(), fit::all_conditions().end());
    write_verdicts(w, d.rep, all);
    write_identities(w, d.ids);
    write_diagram(w, d.ev);
    w.key("any_violation");
    w.value(d.ev.any_violation);
    w.end_object();

    Document doc;
    doc.json = w.str();
    doc.text = classify_text(d);
    doc.exit_code = classify_exit_code(d);
    return doc;
}

Document run_diagram(const RunConfig& cfg) {
    Document doc = run_classify(cfg);
    // same report; the text view leads with the rule outcomes
    return doc;
}

Document run_verify(const RunConfig& cfg) {
    auto d = run_pipeline(cfg, true);
    JsonW w;
    w.begin_object();
    write_meta(w, cfg, d.metric, "verify");
    write_points(w, d.pts);
    write_tensors(w, d.rep);
    // only the premise conditions the identities consume
    std::vector<fit::Condition> prem{fit::Condition::F,    fit::Condition::TwoF,
                                     fit::Condition::GF,   fit::Condition::G2F,
                                     fit::Condition::CF,   fit::Condition::TwoCF,
                                     fit::Condition::GCF};
    write_verdicts(w, d.rep, prem);
    write_identities(w, d.ids);
    w.key("diagram");
    w.begin_array();
    w.end_array();
    w.key("any_violation");
    w.value(false);
    w.end_object();

    Document doc;
    doc.json = w.str();
    std::ostringstream os;
    os << "metric " << d.metric.label << " identities:\n";
    for (const auto& [name, res] : d.ids.front()) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "  %-24s residual %.3e %s", name.c_str(), res.residual,
                      res.applicable ? "(applicable)" : "(hypothesis not met)");
        os << buf << "\n";
    }
    doc.text = os.str();
    bool all_degenerate = true;
    for (auto c : prem)
        if (d.rep.at(c).verdict != fit::Verdict::Degenerate) all_degenerate = false;
    doc.exit_code = all_degenerate ? 3 : 0;
    return doc;
}

Document run_oracle(const RunConfig& cfg) {
    if (cfg.depth == geom::Depth::Second)
        throw std::invalid_argument(
            "oracle compares at most first-derivative data; finite differences of the "
            "second horizontal derivatives are too noisy");
    auto metric = load_metric(cfg);
    auto pts = sample_points(metric, cfg.points, cfg.seed);

    std::vector<oracle::CompareResult> results;
    double max_rel = 0.0;
    for (const auto& p : pts) {
        results.push_back(oracle::compare(metric, p, cfg.order));
        max_rel = std::max(max_rel, results.back().max_rel);
    }

    JsonW w;
    w.begin_object();
    write_meta(w, cfg, metric, "oracle");
    write_points(w, pts);
    w.key("cross_check");
    w.begin_object();
    w.key("per_point");
    w.begin_array();
    for (const auto& res : results) {
        w.begin_object();
        for (const auto& dev : res.per_tensor) {
            w.key(dev.tensor);
            w.value(dev.rel);
        }
        w.key("max_rel");
        w.value(res.max_rel);
        w.end_object();
    }
    w.end_array();
    w.key("max_rel");
    w.value(max_rel);
    w.key("gate");
    w.value(kOracleGate);
    w.end_object();
    w.end_object();

    Document doc;
    doc.json = w.str();
    std::ostringstream os;
    os << "metric " << metric.label << " jet-vs-difference max relative deviation: " << max_rel
       << "\n";
    doc.text = os.str();
    doc.exit_code = max_rel > kOracleGate ? 2 : 0;
    return doc;
}

}  // namespace finsler::report
