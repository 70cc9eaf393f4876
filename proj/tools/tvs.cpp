// Scenario runner: `tvs run|mms|galerkin-compare|validate-material <config>`.
// Exit codes: 0 success, 1 configuration error, 2 positivity loss,
// 3 solver non-convergence/blowup.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "tvs/scenario.hpp"

namespace {

int classify(const std::exception& e) {
    if (dynamic_cast<const tvs::PositivityLost*>(&e) ||
        dynamic_cast<const tvs::NonPositiveTemperature*>(&e) ||
        dynamic_cast<const tvs::NotPositiveDefinite*>(&e))
        return 2;
    if (dynamic_cast<const tvs::PoissonNoConvergence*>(&e) ||
        dynamic_cast<const tvs::BlowupDetected*>(&e) ||
        dynamic_cast<const tvs::CflViolation*>(&e) ||
        dynamic_cast<const tvs::QuadratureFailure*>(&e))
        return 3;
    return 1;
}

int cmd_run(const std::string& config_path) {
    const tvs::ConfigMap cfg = tvs::ConfigMap::parse_file(config_path);
    const tvs::SimConfig sc = tvs::load_sim_config(cfg);
    const std::string out = tvs::resolve_out_dir(sc.out_dir);
    const tvs::RunOutput res = tvs::run_simulation(sc, &out);
    const tvs::BudgetRecord& first = res.budget.front();
    const tvs::BudgetRecord& last = res.budget.back();
    std::printf("run complete: t = %.6g, %zu outputs -> %s\n", last.t,
                res.budget.size(), out.c_str());
    std::printf("  E_total %.10g -> %.10g   S_total %.10g -> %.10g\n",
                first.E_total, last.E_total, first.S_total, last.S_total);
    std::printf("  min theta %.6g   min detF %.6g\n", last.min_theta, last.min_detF);
    return 0;
}

int cmd_mms(const std::string& config_path) {
    const tvs::ConfigMap cfg = tvs::ConfigMap::parse_file(config_path);
    const std::string out = tvs::resolve_out_dir(cfg.get_string("output.dir", "out"));
    const std::vector<tvs::MmsRow> rows = tvs::run_mms_study(cfg, &out);
    for (const tvs::MmsRow& r : rows)
        std::printf("n=%4d  err_v=%.4e err_theta=%.4e err_F=%.4e  "
                    "orders v=%.3f theta=%.3f F=%.3f\n",
                    r.n, r.err_v, r.err_theta, r.err_F, r.order_v, r.order_theta,
                    r.order_F);
    const bool ok = tvs::mms_orders_ok(cfg, rows);
    std::printf("convergence orders %s\n", ok ? "within the accepted band" : "OUT OF BAND");
    return ok ? 0 : 3;
}

int cmd_galerkin(const std::string& config_path) {
    const tvs::ConfigMap cfg = tvs::ConfigMap::parse_file(config_path);
    const std::string out = tvs::resolve_out_dir(cfg.get_string("output.dir", "out"));
    const tvs::GalerkinCompareResult res = tvs::run_galerkin_compare_study(cfg, &out);
    for (const tvs::DiscrepancyRow& r : res.rows)
        std::printf("t=%.6g  d_v=%.4e  d_theta=%.4e  d_F=%.4e\n", r.t, r.d_v,
                    r.d_theta, r.d_F);
    const bool ok = res.pass();
    std::printf("discrepancies %s tolerance %.3g\n", ok ? "within" : "EXCEED",
                res.tolerance);
    return ok ? 0 : 3;
}

int cmd_validate(const std::string& config_path) {
    const tvs::ConfigMap cfg = tvs::ConfigMap::parse_file(config_path);
    const tvs::MaterialModel m = tvs::parse_material(cfg);
    const double sample_max = cfg.get_double("validate.sample_max", 100.0);
    const int samples = cfg.get_int("validate.samples", 1000);
    const tvs::ValidationReport rep = tvs::validate_bounds(m, sample_max, samples);
    for (const tvs::BoundCheck& c : rep.checks) {
        if (c.passed)
            std::printf("%-22s pass\n", c.name.c_str());
        else
            std::printf("%-22s FAIL (first violation at s = %.6g)\n",
                        c.name.c_str(), c.first_violation_s);
    }
    return rep.all_passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermoviscoelastic fluid simulator"};
    app.require_subcommand(1);

    std::string run_cfg, mms_cfg, gal_cfg, val_cfg;
    CLI::App* run = app.add_subcommand("run", "time-step a scenario");
    run->add_option("config", run_cfg, "config file")->required();
    CLI::App* mms = app.add_subcommand("mms", "manufactured-solution convergence study");
    mms->add_option("config", mms_cfg, "config file")->required();
    CLI::App* gal = app.add_subcommand("galerkin-compare",
                                       "spectral cross-validation study");
    gal->add_option("config", gal_cfg, "config file")->required();
    CLI::App* val = app.add_subcommand("validate-material",
                                       "check material admissibility bounds");
    val->add_option("config", val_cfg, "config file")->required();

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(run_cfg);
        if (mms->parsed()) return cmd_mms(mms_cfg);
        if (gal->parsed()) return cmd_galerkin(gal_cfg);
        return cmd_validate(val_cfg);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return classify(e);
    }
}
