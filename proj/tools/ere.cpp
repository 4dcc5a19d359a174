// Command-line front end: index / collision / sweep / trace-curves / verify.

#include <CLI11.hpp>
#include <json.hpp>

#include "ere/acceptance.hpp"
#include "ere/collision.hpp"
#include "ere/stability.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::json;
using namespace ere;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitStrictProbe = 4;
constexpr int kExitInternal = 5;

std::string fmt_real(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

// Ordered flat record; doubles are rendered at 12 significant digits so
// output is byte-stable across runs and parallelism degrees.
struct Row {
    std::vector<std::pair<std::string, json>> fields;

    void add(const std::string& key, const json& v) { fields.emplace_back(key, v); }
    void add_real(const std::string& key, double v) { fields.emplace_back(key, fmt_real(v)); }
};

void emit(const std::vector<Row>& rows, const std::string& format, const std::string& out_path) {
    std::ostringstream os;
    if (format == "json") {
        json arr = json::array();
        for (const auto& row : rows) {
            json obj = json::object();
            for (const auto& [k, v] : row.fields) obj[k] = v;
            arr.push_back(obj);
        }
        os << arr.dump(2) << "\n";
    } else {
        if (!rows.empty()) {
            for (size_t i = 0; i < rows.front().fields.size(); ++i)
                os << rows.front().fields[i].first
                   << (i + 1 < rows.front().fields.size() ? "," : "");
            os << "\n";
        }
        for (const auto& row : rows) {
            for (size_t i = 0; i < row.fields.size(); ++i) {
                const json& v = row.fields[i].second;
                os << (v.is_string() ? v.get<std::string>() : v.dump())
                   << (i + 1 < row.fields.size() ? "," : "");
            }
            os << "\n";
        }
    }
    if (out_path.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream f(out_path);
        f << os.str();
    }
}

void emit_error(const std::string& kind, const std::string& message) {
    json err{{"error", kind}, {"message", message}};
    std::cerr << err.dump() << "\n";
}

struct CommonOpts {
    std::string family = "euler";
    double param = 0.1;
    std::string format = "csv";
    std::string out;
    int jobs = 1;
    double tol_abs = 1e-10, tol_rel = 1e-10;
    double tmax = 0;
    bool strict = false;

    OdeOptions ode() const {
        OdeOptions o;
        o.abs_tol = tol_abs;
        o.rel_tol = tol_rel;
        return o;
    }
    TruncationPolicy trunc() const {
        TruncationPolicy t;
        t.t_max = tmax;
        return t;
    }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_family = true) {
    if (with_family) {
        cmd->add_option("--family", o.family, "configuration family: euler|lagrange|ring3")
            ->capture_default_str();
        cmd->add_option("--param", o.param, "family parameter")->capture_default_str();
    }
    cmd->add_option("--format", o.format, "csv|json")->capture_default_str();
    cmd->add_option("--out", o.out, "output file (default: stdout)");
    cmd->add_option("--jobs", o.jobs, "worker threads");
    cmd->add_option("--tol-abs", o.tol_abs, "integrator absolute tolerance")
        ->capture_default_str();
    cmd->add_option("--tol-rel", o.tol_rel, "integrator relative tolerance")
        ->capture_default_str();
    cmd->add_option("--tmax", o.tmax, "transport horizon override (0 = automatic)");
    cmd->add_flag("--strict", o.strict, "fail hard on probe warnings");
}

Row cell_row(const StabilityCell& cell, const std::string& family, const CommonOpts& o) {
    Row r;
    r.add("family", family);
    r.add_real("param", cell.param);
    r.add_real("e", cell.e);
    r.add("i1", cell.i1);
    r.add("im1", cell.im1);
    r.add("mu_d", cell.mu_d);
    r.add("mu_n", cell.mu_n);
    r.add("nu1", cell.nu1);
    r.add("num1", cell.num1);
    r.add("classification", cell.classification);
    r.add("status", cell.status);
    r.add_real("drift", cell.drift);
    r.add_real("wall_ms", cell.wall_ms);
    r.add("domain", cell.domain);
    r.add_real("tol_abs", o.tol_abs);
    r.add_real("tol_rel", o.tol_rel);
    return r;
}

int cmd_index(const CommonOpts& o, double e) {
    StabilityCell cell = compute_cell(family_from_name(o.family), o.param, e, o.ode());
    if (cell.status != "ok") {
        emit_error("computation", cell.status);
        return cell.status.find("must") != std::string::npos ? kExitDomain : kExitConvergence;
    }
    emit({cell_row(cell, o.family, o)}, o.format, o.out);
    if (!cell.converged) {
        emit_error("convergence", "index computation carries a degeneracy flag");
        return kExitConvergence;
    }
    return kExitOk;
}

int cmd_collision(const CommonOpts& o, const std::string& trace_path) {
    const Family fam = family_from_name(o.family);
    CentralConfig cfg = build_config(fam, o.param);
    L0Table t = l0_analytic_indices(cfg);
    IndexReport ivd =
        heteroclinic_index_lplus(cfg, dirichlet_frame(cfg.k), o.trunc(), {}, o.ode());
    IndexReport ivn = heteroclinic_index_lplus(cfg, neumann_frame(cfg.k), o.trunc(), {}, o.ode());
    ProbeResult probe = nondegeneracy_probe(fam, o.param, o.trunc(), {}, o.ode());

    Row r;
    r.add("family", o.family);
    r.add_real("param", o.param);
    r.add("i_minus_vd_l0p", t.i_minus_vd_l0p);
    r.add("i_minus_vn_l0p", t.i_minus_vn_l0p);
    r.add("i_plus_vd_vd_l0m", t.i_plus_vd_vd_l0m);
    r.add("i_plus_vd_vn_l0m", t.i_plus_vd_vn_l0m);
    r.add("i_plus_vn_vd_l0m", t.i_plus_vn_vd_l0m);
    r.add("i_plus_vn_vn_l0m", t.i_plus_vn_vn_l0m);
    r.add("i_vd_lplus", ivd.index);
    r.add("i_vn_lplus", ivn.index);
    r.add("converged", ivd.diagnostics.converged && ivn.diagnostics.converged);
    if (cfg.N) {
        BrakeSplit bs = brake_split(cfg, o.trunc(), {}, o.ode());
        r.add("i_minus_vplus_lpm", bs.i_minus_plus_lpm);
        r.add("i_minus_vminus_lpm", bs.i_minus_minus_lpm);
    }
    r.add("probe", probe_status_name(probe.status));
    r.add_real("tmax", auto_horizon(cfg, o.trunc()));
    r.add_real("tol_abs", o.tol_abs);
    r.add_real("tol_rel", o.tol_rel);
    emit({r}, o.format, o.out);

    if (!trace_path.empty() && cfg.k == 2 && cfg.N) {
        HalfClinicProblem prob;
        prob.side = ClinicSide::lplus_minus;
        prob.cfg = cfg;
        prob.trunc = o.trunc();
        std::vector<Row> rows;
        for (int sgn : {+1, -1}) {
            prob.V1 = brake_frame(cfg, sgn);
            ExteriorResult ext = exterior_index_4d(prob, 0, {}, o.ode());
            for (const auto& [tau, y6] : ext.trace.curve) {
                Row tr;
                tr.add("side", sgn > 0 ? "vplus" : "vminus");
                tr.add_real("tau", tau);
                tr.add_real("det", y6);
                rows.push_back(std::move(tr));
            }
        }
        emit(rows, "csv", trace_path);
    }
    if (o.strict && probe.status == ProbeStatus::jump_detected) {
        emit_error("probe", "collision-nondegeneracy probe detected a jump near " +
                                fmt_real(probe.candidate_param));
        return kExitStrictProbe;
    }
    return kExitOk;
}

int cmd_sweep(const CommonOpts& o, double pmin, double pmax, int psteps, double emin, double emax,
              int esteps) {
    if (psteps < 1 || esteps < 1) throw DomainError("sweep: grid steps must be positive");
    std::vector<double> params, es;
    for (int i = 0; i < psteps; ++i)
        params.push_back(psteps == 1 ? pmin : pmin + (pmax - pmin) * i / (psteps - 1));
    for (int i = 0; i < esteps; ++i)
        es.push_back(esteps == 1 ? emin : emin + (emax - emin) * i / (esteps - 1));

    auto cells = sweep(family_from_name(o.family), params, es, o.jobs, o.ode());
    std::vector<Row> rows;
    size_t ok = 0;
    for (const auto& cell : cells) {
        rows.push_back(cell_row(cell, o.family, o));
        if (cell.status == "ok") ++ok;
    }
    emit(rows, o.format, o.out);
    return 100 * ok >= 99 * cells.size() ? kExitOk : kExitConvergence;
}

int cmd_trace_curves(const CommonOpts& o, const std::vector<double>& e_list, int j_max,
                     double delta_ceiling) {
    CurveTraceOptions co;
    co.j_max = j_max;
    if (delta_ceiling > 0) co.delta_max_extended = delta_ceiling;
    auto curves = trace_degenerate_curves(e_list, co, o.ode());
    std::vector<Row> rows;
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            Row r;
            r.add("family", "euler");
            r.add("kind", curve_kind_name(c.kind));
            r.add("branch", c.branch);
            r.add_real("e", p.e);
            r.add_real("delta", p.delta);
            r.add_real("bracket_width", p.bracket_width);
            r.add("coincident", p.coincident);
            rows.push_back(std::move(r));
        }
    }
    emit(rows, o.format, o.out);
    return kExitOk;
}

int cmd_verify(const std::string& level_name, int jobs) {
    const VerifyLevel level = level_name == "fast" ? VerifyLevel::fast : VerifyLevel::full;
    auto results = run_acceptance(level, jobs);
    int failed = 0;
    for (const auto& r : results) {
        const char* status = r.skipped ? "SKIP" : (r.pass ? "PASS" : "FAIL");
        if (!r.pass && !r.skipped) ++failed;
        std::printf("[%s] C%02d %-58s (%6.2fs) %s\n", status, r.id, r.name.c_str(), r.wall_s,
                    r.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed,
                results.size());
    return failed == 0 ? kExitOk : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Maslov-type and collision indices for elliptic relative equilibria"};
    app.set_config("--config", "", "flat key=value configuration file with [command] sections");
    app.require_subcommand(1);

    int default_jobs = 1;
    if (const char* env = std::getenv("ERE_JOBS")) default_jobs = std::max(1, std::atoi(env));

    CommonOpts oi, oc, os, ot;
    oi.jobs = oc.jobs = os.jobs = ot.jobs = default_jobs;

    for (auto* sub : {&app}) (void)sub;  // parent holds --config; subcommands fall through
    auto* index = app.add_subcommand("index", "Maslov-type and boundary indices at one point");
    index->fallthrough();
    double e_index = 0.5;
    add_common(index, oi);
    index->add_option("--e", e_index, "eccentricity in [0, 1)")->required();

    auto* collision = app.add_subcommand("collision", "collision indices of one configuration");
    collision->fallthrough();
    std::string trace_path;
    add_common(collision, oc);
    collision->add_option("--trace", trace_path, "write the exterior determinant trace to a file");

    auto* swp = app.add_subcommand("sweep", "grid sweep over parameter and eccentricity");
    swp->fallthrough();
    double pmin = 0.01, pmax = 7.0, emin = 0.0, emax = 0.95;
    int psteps = 10, esteps = 10;
    add_common(swp, os);
    swp->add_option("--param-min", pmin)->capture_default_str();
    swp->add_option("--param-max", pmax)->capture_default_str();
    swp->add_option("--param-steps", psteps)->capture_default_str();
    swp->add_option("--e-min", emin)->capture_default_str();
    swp->add_option("--e-max", emax)->capture_default_str();
    swp->add_option("--e-steps", esteps)->capture_default_str();

    auto* trace = app.add_subcommand("trace-curves", "locate the +-1-degenerate curves");
    trace->fallthrough();
    std::vector<double> e_list{0.9, 0.95, 0.99};
    int j_max = 1;
    double delta_ceiling = 0;
    add_common(trace, ot, false);
    trace->add_option("--e-list", e_list, "eccentricities to trace")->capture_default_str();
    trace->add_option("--jmax", j_max, "branches per family")->capture_default_str();
    trace->add_option("--delta-max", delta_ceiling, "scan ceiling (0 = default)");

    auto* verify = app.add_subcommand("verify", "run the built-in verification battery");
    verify->fallthrough();
    std::string level = "fast";
    int verify_jobs = default_jobs;
    verify->add_option("--level", level, "fast|full")->capture_default_str();
    verify->add_option("--jobs", verify_jobs, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(index)) return cmd_index(oi, e_index);
        if (app.got_subcommand(collision)) return cmd_collision(oc, trace_path);
        if (app.got_subcommand(swp)) return cmd_sweep(os, pmin, pmax, psteps, emin, emax, esteps);
        if (app.got_subcommand(trace)) return cmd_trace_curves(ot, e_list, j_max, delta_ceiling);
        if (app.got_subcommand(verify)) return cmd_verify(level, verify_jobs);
    } catch (const InternalConsistencyError& ex) {
        emit_error("internal-consistency", ex.what());
        return kExitInternal;
    } catch (const ConvergenceError& ex) {
        emit_error("convergence", ex.what());
        return kExitConvergence;
    } catch (const DomainError& ex) {
        emit_error("domain", ex.what());
        return kExitDomain;
    } catch (const std::exception& ex) {
        emit_error("unexpected", ex.what());
        return kExitInternal;
    }
    return kExitOk;
}
