#include "fairsens/report.hpp"

#include <cstdio>
#include <sstream>

namespace fairsens {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

// Minimal sequential JSON writer; field order is exactly call order.
class Json {
public:
    void begin_object() { sep(); buf_ << '{'; fresh_ = true; }
    void end_object() { buf_ << '}'; fresh_ = false; }
    void begin_array() { sep(); buf_ << '['; fresh_ = true; }
    void end_array() { buf_ << ']'; fresh_ = false; }
    void key(const std::string& k) { sep(); buf_ << '"' << json_escape(k) << "\":"; fresh_ = true; }
    void value(const std::string& s) { sep(); buf_ << '"' << json_escape(s) << '"'; }
    void value(const char* s) { value(std::string(s)); }
    void value(double v) { sep(); buf_ << format_double(v); }
    void value(std::int64_t v) { sep(); buf_ << v; }
    void value(int v) { sep(); buf_ << v; }
    void value(std::uint64_t v) { sep(); buf_ << v; }
    void value(bool v) { sep(); buf_ << (v ? "true" : "false"); }
    void null() { sep(); buf_ << "null"; }
    std::string str() const { return buf_.str(); }

private:
    void sep() {
        if (!fresh_) buf_ << ',';
        fresh_ = false;
    }
    std::ostringstream buf_;
    bool fresh_ = true;
};

void write_estimate(Json& j, const IndexEstimate& e) {
    j.begin_object();
    j.key("value"); j.value(e.value);
    j.key("std_error"); j.value(e.std_error);
    j.key("ci_low"); j.value(e.ci_low);
    j.key("ci_high"); j.value(e.ci_high);
    j.key("level"); j.value(e.level);
    j.key("method"); j.value(method_name(e.method));
    j.key("n"); j.value(e.n);
    j.key("seed"); j.value(e.seed);
    j.end_object();
}

void write_quartet(Json& j, const SobolQuartet& q) {
    j.begin_object();
    j.key("features");
    j.begin_array();
    for (int f : q.features) j.value(f);
    j.end_array();
    j.key("sob"); write_estimate(j, q.sob);
    j.key("sob_total"); write_estimate(j, q.sob_total);
    j.key("sob_ind"); write_estimate(j, q.sob_ind);
    j.key("sob_total_ind"); write_estimate(j, q.sob_total_ind);
    j.key("n"); j.value(q.n);
    j.key("seed"); j.value(q.seed);
    j.end_object();
}

void write_verdict(Json& j, const VerdictEntry& entry) {
    const auto& v = entry.verdict;
    j.begin_object();
    j.key("measure"); j.value(measure_name(v.measure));
    j.key("target"); j.value(v.target);
    j.key("sensitive");
    j.begin_array();
    for (const auto& s : v.sensitive) j.value(s);
    j.end_array();
    j.key("index"); write_estimate(j, v.index);
    j.key("epsilon"); j.value(v.epsilon);
    j.key("verdict"); j.value(verdict_name(v.verdict));
    j.key("note"); j.value(v.note);
    j.key("di_check");
    if (entry.di_check) {
        j.begin_object();
        j.key("p_hat"); j.value(entry.di_check->p_hat);
        j.key("di"); j.value(entry.di_check->di);
        j.key("identity_value"); j.value(entry.di_check->identity_value);
        j.end_object();
    } else {
        j.null();
    }
    j.end_object();
}

std::string hash_hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace

std::string to_json(const AuditReport& r) {
    Json j;
    j.begin_object();
    j.key("schema_version"); j.value(kSchemaVersion);
    j.key("tool_version"); j.value(kToolVersion);
    j.key("dataset");
    j.begin_object();
    j.key("rows"); j.value(r.n_rows);
    j.key("columns");
    j.begin_array();
    for (const auto& c : r.column_names) j.value(c);
    j.end_array();
    j.key("hash"); j.value(hash_hex(r.dataset_hash));
    j.end_object();
    j.key("seeds");
    j.begin_object();
    j.key("seed"); j.value(r.seed);
    j.key("tie_seed"); j.value(r.tie_seed);
    j.end_object();
    j.key("n_mc"); j.value(r.n_mc);
    j.key("epsilon"); j.value(r.epsilon);
    j.key("model_source"); j.value(r.model_source);

    j.key("verdicts");
    j.begin_array();
    for (const auto& v : r.verdicts) write_verdict(j, v);
    j.end_array();

    j.key("sobol_quartets");
    j.begin_array();
    for (const auto& q : r.quartets) {
        j.begin_object();
        j.key("label"); j.value(q.label);
        j.key("quartet"); write_quartet(j, q.quartet);
        j.end_object();
    }
    j.end_array();

    j.key("cvm_estimates");
    j.begin_array();
    for (const auto& c : r.cvm_estimates) {
        j.begin_object();
        j.key("label"); j.value(c.label);
        j.key("kind"); j.value(cvm_kind_name(c.estimate.kind));
        j.key("value"); j.value(c.estimate.value);
        j.key("n"); j.value(c.estimate.n);
        j.key("tie_seed"); j.value(c.estimate.tie_seed);
        j.key("ci");
        if (c.estimate.ci) {
            write_estimate(j, *c.estimate.ci);
        } else {
            j.null();
        }
        j.end_object();
    }
    j.end_array();

    j.key("intersectional");
    if (r.intersectional) {
        const auto& x = *r.intersectional;
        j.begin_object();
        j.key("sensitive");
        j.begin_array();
        for (const auto& s : x.sensitive_names) j.value(s);
        j.end_array();
        j.key("epsilon"); j.value(x.epsilon);
        j.key("group"); write_quartet(j, x.group);
        j.key("singletons");
        j.begin_array();
        for (const auto& s : x.singletons) write_quartet(j, s);
        j.end_array();
        j.key("total_bound_consistent"); j.value(x.total_bound_consistent);
        j.key("total_bound_note"); j.value(x.total_bound_note);
        j.key("joint_effect_warning"); j.value(x.joint_effect_warning);
        j.key("joint_effect_note"); j.value(x.joint_effect_note);
        j.end_object();
    } else {
        j.null();
    }

    j.key("causal");
    j.begin_array();
    for (const auto& c : r.causal) {
        j.begin_object();
        j.key("label"); j.value(c.label);
        j.key("finding"); j.value(causal_finding_name(c.finding.kind));
        j.key("sob_total"); write_estimate(j, c.finding.sob_total);
        j.key("sob_total_ind"); write_estimate(j, c.finding.sob_total_ind);
        j.key("epsilon"); j.value(c.finding.epsilon);
        j.key("note"); j.value(c.finding.note);
        j.end_object();
    }
    j.end_array();

    j.key("notes");
    j.begin_array();
    for (const auto& n : r.notes) j.value(n);
    j.end_array();

    j.end_object();
    return j.str() + "\n";
}

namespace {

void csv_estimate_row(std::ostringstream& out, const std::string& label, const std::string& kind,
                      const IndexEstimate& e, const std::string& theory) {
    out << label << ',' << kind << ',' << format_double(e.value) << ','
        << format_double(e.ci_low) << ',' << format_double(e.ci_high) << ','
        << format_double(e.std_error) << ',' << theory << ',' << method_name(e.method) << ','
        << e.n << ',' << e.seed << '\n';
}

} // namespace

std::string to_csv(const AuditReport& r) {
    std::ostringstream out;
    out << "label,kind,value,ci_low,ci_high,std_error,theory,method,n,seed\n";
    for (const auto& v : r.verdicts) {
        std::string label = std::string(measure_name(v.verdict.measure)) + ":" +
                            verdict_name(v.verdict.verdict);
        csv_estimate_row(out, label, "fairness_index", v.verdict.index, "");
    }
    for (const auto& q : r.quartets) {
        csv_estimate_row(out, q.label, "sob", q.quartet.sob, "");
        csv_estimate_row(out, q.label, "sob_total", q.quartet.sob_total, "");
        csv_estimate_row(out, q.label, "sob_ind", q.quartet.sob_ind, "");
        csv_estimate_row(out, q.label, "sob_total_ind", q.quartet.sob_total_ind, "");
    }
    for (const auto& c : r.cvm_estimates) {
        IndexEstimate e = c.estimate.ci ? *c.estimate.ci
                                        : point_estimate(c.estimate.value, Method::plugin,
                                                         c.estimate.n, c.estimate.tie_seed);
        csv_estimate_row(out, c.label, cvm_kind_name(c.estimate.kind), e, "");
    }
    return out.str();
}

std::string to_json(const std::vector<ExperimentRow>& rows, const ExperimentSpec& spec) {
    Json j;
    j.begin_object();
    j.key("schema_version"); j.value(kSchemaVersion);
    j.key("tool_version"); j.value(kToolVersion);
    j.key("experiment"); j.value(spec.id);
    j.key("n_mc"); j.value(spec.n_mc);
    j.key("seed"); j.value(spec.seed);
    j.key("rows");
    j.begin_array();
    for (const auto& row : rows) {
        j.begin_object();
        j.key("variable"); j.value(row.variable);
        j.key("estimate"); write_quartet(j, row.estimate);
        j.key("theory");
        j.begin_object();
        j.key("sob"); j.value(row.theory.sob);
        j.key("sob_total"); j.value(row.theory.sob_total);
        j.key("sob_ind"); j.value(row.theory.sob_ind);
        j.key("sob_total_ind"); j.value(row.theory.sob_total_ind);
        j.end_object();
        j.end_object();
    }
    j.end_array();
    j.end_object();
    return j.str() + "\n";
}

std::string to_csv(const std::vector<ExperimentRow>& rows, const ExperimentSpec& spec) {
    std::ostringstream out;
    out << "label,kind,value,ci_low,ci_high,std_error,theory,method,n,seed\n";
    for (const auto& row : rows) {
        const std::string label = "experiment" + std::to_string(spec.id) + ":" + row.variable;
        csv_estimate_row(out, label, "sob", row.estimate.sob, format_double(row.theory.sob));
        csv_estimate_row(out, label, "sob_total", row.estimate.sob_total,
                         format_double(row.theory.sob_total));
        csv_estimate_row(out, label, "sob_ind", row.estimate.sob_ind,
                         format_double(row.theory.sob_ind));
        csv_estimate_row(out, label, "sob_total_ind", row.estimate.sob_total_ind,
                         format_double(row.theory.sob_total_ind));
    }
    return out.str();
}

std::string to_json(const std::vector<CoverageRow>& rows, const ExperimentSpec& spec,
                    std::int64_t n, double level) {
    Json j;
    j.begin_object();
    j.key("schema_version"); j.value(kSchemaVersion);
    j.key("tool_version"); j.value(kToolVersion);
    j.key("experiment"); j.value(spec.id);
    j.key("seed"); j.value(spec.seed);
    j.key("n"); j.value(n);
    j.key("level"); j.value(level);
    j.key("coverage");
    j.begin_array();
    for (const auto& r : rows) {
        j.begin_object();
        j.key("variable"); j.value(r.variable);
        j.key("index"); j.value(index_kind_name(r.kind));
        j.key("coverage"); j.value(r.coverage);
        j.key("binomial_halfwidth"); j.value(r.binomial_halfwidth);
        j.key("replicates"); j.value(r.replicates);
        j.end_object();
    }
    j.end_array();
    j.end_object();
    return j.str() + "\n";
}

std::string to_csv(const std::vector<CoverageRow>& rows, const ExperimentSpec& spec,
                   std::int64_t n, double level) {
    std::ostringstream out;
    out << "experiment,variable,index,coverage,binomial_halfwidth,replicates,n,level,seed\n";
    for (const auto& r : rows) {
        out << spec.id << ',' << r.variable << ',' << index_kind_name(r.kind) << ','
            << format_double(r.coverage) << ',' << format_double(r.binomial_halfwidth) << ','
            << r.replicates << ',' << n << ',' << format_double(level) << ',' << spec.seed
            << '\n';
    }
    return out.str();
}

} // namespace fairsens
