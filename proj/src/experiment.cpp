#include "beamfill/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include "beamfill/checkpoint.hpp"
#include "beamfill/error_model.hpp"
#include "beamfill/errors.hpp"
#include "beamfill/geometry.hpp"
#include "beamfill/rng.hpp"

namespace beamfill {

namespace {

namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v, const char* spec) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write to '" + path + "'");
}

std::string synth_name(const char* role, std::size_t k, std::size_t count) {
    int width = 2;
    for (std::size_t c = count; c >= 100; c /= 10) ++width;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%0*zu", role, width, k);
    return buf;
}

/// Pretty column label for the published-table shape.
std::string display_name(const std::string& id) {
    if (id == "average") return "Average";
    if (id == "libeamsnet") return "LiBeamsNet";
    if (id == "missbeamnet") return "MissBeamNet";
    if (id == "oracle") return "Oracle";
    return id;
}

Section from_velocities(const std::string& name, const BeamGeometry& geom,
                        const std::vector<double>& t,
                        const std::vector<Vec3>& v, ErrorParams params,
                        std::uint64_t corrupt_seed) {
    params.seed = corrupt_seed;
    const std::vector<Vec4> beams = corrupt_series(geom, v, params);
    Section s;
    s.name = name;
    s.records.resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        s.records[k] = {t[k], beams[k], v[k]};
    return s;
}

}  // namespace

RunPaths::RunPaths(const std::string& out_dir)
    : root(out_dir),
      data_dir((fs::path(out_dir) / "data").string()),
      checkpoints_dir((fs::path(out_dir) / "checkpoints").string()),
      losses_dir((fs::path(out_dir) / "losses").string()),
      reports_dir((fs::path(out_dir) / "reports").string()),
      resolved_config((fs::path(out_dir) / "resolved_config.ini").string()) {}

std::string RunPaths::checkpoint(const std::string& estimator) const {
    return (fs::path(checkpoints_dir) / (estimator + ".ckpt")).string();
}

std::string RunPaths::loss_csv(const std::string& estimator) const {
    return (fs::path(losses_dir) / ("loss_" + estimator + ".csv")).string();
}

SectionSet build_sections(const ExperimentConfig& cfg,
                          std::vector<std::string>* warnings) {
    const BeamGeometry geom = build_geometry(cfg.alpha_deg * kPi / 180.0);
    std::vector<Section> sections;
    SplitAssignment assignment;
    std::size_t idx = 0;  // global section index, drives the derived seeds

    if (cfg.source == DataSource::synthetic) {
        auto make_role = [&](const char* role, std::size_t count,
                             std::vector<std::string>* names) {
            for (std::size_t k = 1; k <= count; ++k, ++idx) {
                const std::vector<Vec3> v = synth_trajectory(
                    cfg.profile, cfg.duration_s,
                    derive_seed(cfg.seed, "synth", idx));
                std::vector<double> t(v.size());
                for (std::size_t j = 0; j < t.size(); ++j)
                    t[j] = static_cast<double>(j);
                const std::string name = synth_name(role, k, count);
                sections.push_back(
                    from_velocities(name, geom, t, v, cfg.corruption,
                                    derive_seed(cfg.seed, "corrupt", idx)));
                names->push_back(name);
            }
        };
        make_role("train", cfg.train_count, &assignment.train);
        make_role("test", cfg.test_count, &assignment.test);
    } else {
        auto load_role = [&](const std::vector<std::string>& names) {
            for (const std::string& name : names) {
                const std::string path =
                    (fs::path(cfg.csv_dir) / (name + ".csv")).string();
                if (cfg.source == DataSource::csv_beams) {
                    sections.push_back(load_csv(path, cfg.schema, name));
                } else {
                    const VelocitySeries vs =
                        load_velocity_csv(path, cfg.schema);
                    sections.push_back(from_velocities(
                        name, geom, vs.t, vs.v, cfg.corruption,
                        derive_seed(cfg.seed, "corrupt", idx)));
                }
                ++idx;
            }
        };
        load_role(cfg.train_sections);
        load_role(cfg.test_sections);
        assignment.train = cfg.train_sections;
        assignment.test = cfg.test_sections;
    }
    return split_sections(std::move(sections), assignment, warnings);
}

std::vector<WindowSample> pool_windows(const std::vector<Section>& sections,
                                       std::size_t n, const BeamMask& mask) {
    std::vector<WindowSample> out;
    for (const Section& s : sections) {
        std::vector<WindowSample> w = make_windows(s, n, mask);
        out.insert(out.end(), std::make_move_iterator(w.begin()),
                   std::make_move_iterator(w.end()));
    }
    return out;
}

void run_simulate(const ExperimentConfig& cfg) {
    if (cfg.source != DataSource::synthetic)
        throw ConfigError(
            "dataset.source: simulate requires a synthetic source");
    const RunPaths paths(cfg.out_dir);
    fs::create_directories(paths.data_dir);

    const SectionSet set = build_sections(cfg);
    const char d = cfg.schema.delimiter;
    auto emit = [&](const Section& s) {
        std::ostringstream csv;
        csv << cfg.schema.time;
        for (const std::string& b : cfg.schema.beams) csv << d << b;
        for (const std::string& v : cfg.schema.velocity) csv << d << v;
        csv << "\n";
        for (const BeamRecord& rec : s.records) {
            csv << fmt(rec.t, "%.17g");
            for (double b : rec.beams) csv << d << fmt(b, "%.17g");
            for (double v : rec.v_true) csv << d << fmt(v, "%.17g");
            csv << "\n";
        }
        write_file((fs::path(paths.data_dir) / (s.name + ".csv")).string(),
                   csv.str());
    };
    for (const Section& s : set.train) emit(s);
    for (const Section& s : set.test) emit(s);
    write_file(paths.resolved_config, serialize_config(cfg));
}

std::vector<TrainResult> run_train(const ExperimentConfig& cfg) {
    const RunPaths paths(cfg.out_dir);
    fs::create_directories(paths.checkpoints_dir);
    fs::create_directories(paths.losses_dir);

    const SectionSet set = build_sections(cfg);
    const std::vector<WindowSample> train_set =
        pool_windows(set.train, cfg.window_n, cfg.missing_mask);
    const std::vector<WindowSample> test_set =
        pool_windows(set.test, cfg.window_n, cfg.missing_mask);

    std::vector<TrainResult> results;
    for (EstimatorTag tag : cfg.run) {
        if (tag == EstimatorTag::average) continue;
        const std::string name = estimator_name(tag);
        const std::uint64_t net_id = static_cast<std::uint64_t>(tag);

        std::unique_ptr<NeuralEstimator> net;
        TrainConfig tc;
        if (tag == EstimatorTag::libeamsnet) {
            net = std::make_unique<LiBeamsNet>(
                cfg.window_n, cfg.missing_mask, cfg.li_fc1, cfg.li_fc2,
                cfg.li_dropout, derive_seed(cfg.seed, "init", net_id));
            tc = cfg.li_train;
        } else {
            net = std::make_unique<MissBeamNet>(
                cfg.window_n, cfg.missing_mask, cfg.mb_hidden,
                derive_seed(cfg.seed, "init", net_id));
            tc = cfg.mb_train;
        }
        tc.seed = derive_seed(cfg.seed, "train", net_id);

        LossHistory history = train(*net, train_set, test_set, tc);
        save_checkpoint(paths.checkpoint(name), *net);

        std::ostringstream csv;
        csv << "epoch,train_loss,test_loss\n";
        for (std::size_t e = 0; e < history.train_loss.size(); ++e)
            csv << (e + 1) << "," << fmt(history.train_loss[e], "%.9g") << ","
                << fmt(history.test_loss[e], "%.9g") << "\n";
        write_file(paths.loss_csv(name), csv.str());

        results.push_back({name, paths.checkpoint(name), std::move(history)});
    }
    write_file(paths.resolved_config, serialize_config(cfg));
    return results;
}

EvalReport run_eval(const ExperimentConfig& cfg, bool oracle,
                    const std::vector<std::string>& checkpoint_paths) {
    const RunPaths paths(cfg.out_dir);
    fs::create_directories(paths.reports_dir);

    EvalReport report;
    const SectionSet set = build_sections(cfg, &report.warnings);
    const std::vector<Section>& eval_sections =
        set.test.empty() ? set.train : set.test;

    // Window lists per section; the pooled scope is their concatenation.
    std::vector<std::string> scope_names = {"pooled"};
    std::vector<std::vector<WindowSample>> scope_samples(1);
    for (const Section& s : eval_sections) {
        std::vector<WindowSample> w =
            make_windows(s, cfg.window_n, cfg.missing_mask);
        scope_samples[0].insert(scope_samples[0].end(), w.begin(), w.end());
        scope_names.push_back(s.name);
        scope_samples.push_back(std::move(w));
    }

    // Resolve the strategies: the average needs no state, the neural ones
    // load checkpoints (explicit paths win over the output layout, matched
    // by the checkpoint's own estimator kind).
    std::map<EstimatorTag, std::unique_ptr<NeuralEstimator>> nets;
    for (const std::string& p : checkpoint_paths) {
        std::unique_ptr<NeuralEstimator> net = load_checkpoint(p);
        const EstimatorTag tag = net->tag();
        if (nets.count(tag))
            throw ConfigError("two checkpoints provided for '" +
                              estimator_name(tag) + "'");
        nets[tag] = std::move(net);
    }
    struct Strategy {
        std::string id;
        std::function<std::vector<std::vector<double>>(
            const std::vector<WindowSample>&)>
            predict_series;
    };
    std::vector<Strategy> strategies;
    for (EstimatorTag tag : cfg.run) {
        const std::string id = estimator_name(tag);
        if (tag == EstimatorTag::average) {
            strategies.push_back(
                {id, [](const std::vector<WindowSample>& ss) {
                     std::vector<std::vector<double>> p;
                     p.reserve(ss.size());
                     for (const WindowSample& s : ss)
                         p.push_back(average_predict(s));
                     return p;
                 }});
            continue;
        }
        if (!nets.count(tag)) nets[tag] = load_checkpoint(paths.checkpoint(id));
        NeuralEstimator* net = nets[tag].get();
        if (net->window() != cfg.window_n || net->mask() != cfg.missing_mask)
            throw ModelMismatch("checkpoint for '" + id +
                                "' disagrees with the configured window or "
                                "missing-beam mask");
        strategies.push_back({id, [net](const std::vector<WindowSample>& ss) {
                                  return net->predict_missing_many(ss);
                              }});
    }
    if (oracle)
        strategies.push_back(
            {"oracle", [](const std::vector<WindowSample>& ss) {
                 std::vector<std::vector<double>> p;
                 p.reserve(ss.size());
                 for (const WindowSample& s : ss) p.push_back(s.target_missing);
                 return p;
             }});

    const BeamGeometry geom = build_geometry(cfg.alpha_deg * kPi / 180.0);
    // 0-based ids of the regressed beams, for the per-beam diagnostics
    std::vector<int> masked_beams;
    for (int b = 0; b < 4; ++b)
        if (cfg.missing_mask[b]) masked_beams.push_back(b);

    // Reference: the velocity norm the full beam set yields.
    std::vector<std::vector<double>> scope_truth(scope_names.size());
    for (std::size_t sc = 0; sc < scope_names.size(); ++sc)
        for (const WindowSample& s : scope_samples[sc])
            scope_truth[sc].push_back(
                norm3(solve_velocity(geom, s.target_all, kAllBeams)));

    // Every sample appears exactly once in the pooled scope and each section
    // scope is a contiguous slice of it, so predictions and the rebuilt
    // velocity norms are computed in one pass over the pooled series and
    // sliced per scope. Per-sample outputs do not depend on how a series is
    // batched, so the slices match a per-scope pass bit for bit.
    const std::vector<WindowSample>& pooled = scope_samples[0];
    std::vector<std::size_t> scope_begin = {0};
    std::vector<std::size_t> scope_end = {pooled.size()};
    for (std::size_t sc = 1, off = 0; sc < scope_samples.size(); ++sc) {
        scope_begin.push_back(off);
        off += scope_samples[sc].size();
        scope_end.push_back(off);
    }
    std::vector<std::vector<std::vector<double>>> strat_preds;
    std::vector<std::vector<double>> strat_norms;
    for (const Strategy& strat : strategies) {
        std::vector<std::vector<double>> preds = strat.predict_series(pooled);
        std::vector<double> norms;
        norms.reserve(pooled.size());
        for (std::size_t i = 0; i < pooled.size(); ++i)
            norms.push_back(norm3(solve_velocity(
                geom, reconstruct_full_beams(pooled[i], preds[i]), kAllBeams)));
        strat_preds.push_back(std::move(preds));
        strat_norms.push_back(std::move(norms));
    }

    for (std::size_t sc = 0; sc < scope_names.size(); ++sc) {
        ScopeReport scope;
        scope.scope = scope_names[sc];
        const std::vector<double>& truth = scope_truth[sc];
        double avg_rmse = 0, avg_mae = 0;
        bool have_avg = false, warned_constant = false;

        for (std::size_t si = 0; si < strategies.size(); ++si) {
            const Strategy& strat = strategies[si];
            const std::vector<double> pred_norms(
                strat_norms[si].begin() +
                    static_cast<std::ptrdiff_t>(scope_begin[sc]),
                strat_norms[si].begin() +
                    static_cast<std::ptrdiff_t>(scope_end[sc]));

            StrategyScores row;
            row.strategy = strat.id;
            row.rmse_mps = rmse(truth, pred_norms);
            row.mae_mps = mae(truth, pred_norms);
            bool undefined = false;
            try {
                row.r2 = r_squared(truth, pred_norms);
                row.vaf_pct = vaf(truth, pred_norms);
            } catch (const ConstantTruth&) {
                undefined = true;
            } catch (const EmptyInput&) {  // fewer than 2 samples in scope
                undefined = true;
            }
            if (undefined) {
                row.r2 = std::nan("");
                row.vaf_pct = std::nan("");
                if (!warned_constant) {
                    report.warnings.push_back(
                        "scope '" + scope.scope +
                        "': reference norms are constant or too few; R² and "
                        "VAF are undefined there");
                    warned_constant = true;
                }
            }
            if (strat.id == "average") {
                avg_rmse = row.rmse_mps;
                avg_mae = row.mae_mps;
                have_avg = true;
            } else if (have_avg && avg_rmse > 0) {
                row.has_improvement = true;
                row.rmse_improvement_pct =
                    improvement_percent(avg_rmse, row.rmse_mps);
                row.mae_improvement_pct =
                    improvement_percent(avg_mae, row.mae_mps);
            }
            scope.rows.push_back(row);

            // per-beam prediction/target pairs, diagnostics (pooled only)
            if (sc == 0)
                for (std::size_t m = 0; m < masked_beams.size(); ++m) {
                    std::vector<double> beam_pred, beam_true;
                    beam_pred.reserve(pooled.size());
                    beam_true.reserve(pooled.size());
                    for (std::size_t i = 0; i < pooled.size(); ++i) {
                        beam_pred.push_back(strat_preds[si][i][m]);
                        beam_true.push_back(pooled[i].target_missing[m]);
                    }
                    EvalReport::BeamDiag diag;
                    diag.strategy = strat.id;
                    diag.beam = masked_beams[m] + 1;
                    diag.rmse_mps = rmse(beam_true, beam_pred);
                    diag.mae_mps = mae(beam_true, beam_pred);
                    report.beam_diagnostics.push_back(diag);
                }
        }
        report.scopes.push_back(std::move(scope));
    }

    // --- emit the three report files ---
    std::ostringstream txt;
    txt << "velocity-norm comparison (least-squares recovery from "
           "reconstructed beams)\n";
    for (const ScopeReport& scope : report.scopes) {
        ScopeReport pretty = scope;
        for (StrategyScores& row : pretty.rows)
            row.strategy = display_name(row.strategy);
        txt << "\n== " << scope.scope << " ==\n" << format_table(pretty);
    }
    if (!report.warnings.empty()) {
        txt << "\nwarnings:\n";
        for (const std::string& w : report.warnings) txt << "  - " << w << "\n";
    }
    txt << "\n---- resolved configuration (save below this line as a .ini "
           "to re-run) ----\n"
        << serialize_config(cfg);
    write_file((fs::path(paths.reports_dir) / "report.txt").string(),
               txt.str());

    std::ostringstream csv;
    csv << "scope,strategy,rmse_mps,mae_mps,r2,vaf_pct,rmse_improvement_pct,"
           "mae_improvement_pct\n";
    for (const ScopeReport& scope : report.scopes)
        for (const StrategyScores& row : scope.rows) {
            csv << scope.scope << "," << row.strategy << ","
                << fmt(row.rmse_mps, "%.9g") << "," << fmt(row.mae_mps, "%.9g")
                << "," << fmt(row.r2, "%.9g") << ","
                << fmt(row.vaf_pct, "%.9g") << ",";
            if (row.has_improvement)
                csv << fmt(row.rmse_improvement_pct, "%.9g") << ","
                    << fmt(row.mae_improvement_pct, "%.9g");
            else
                csv << ",";
            csv << "\n";
        }
    write_file((fs::path(paths.reports_dir) / "report.csv").string(),
               csv.str());

    std::ostringstream diag;
    diag << "strategy,beam,rmse_mps,mae_mps\n";
    for (const EvalReport::BeamDiag& d : report.beam_diagnostics)
        diag << d.strategy << "," << d.beam << "," << fmt(d.rmse_mps, "%.9g")
             << "," << fmt(d.mae_mps, "%.9g") << "\n";
    write_file(
        (fs::path(paths.reports_dir) / "beam_diagnostics.csv").string(),
        diag.str());

    write_file(paths.resolved_config, serialize_config(cfg));
    return report;
}

}  // namespace beamfill
