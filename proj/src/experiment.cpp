#include "smcforge/eval/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "smcforge/errors.hpp"

namespace smcforge::eval {
namespace {

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

float truth_at(const models::FeatureData& data, std::size_t day, std::uint32_t px,
               std::uint32_t py) {
    if (day >= data.truth_maps.size() || data.truth_maps[day].data.empty()) {
        throw ValidationError("evaluation: no truth map for day index " + std::to_string(day));
    }
    return data.truth_maps[day].data[static_cast<std::size_t>(py) * data.geo.width + px];
}

}  // namespace

EvalPairs collect_map_forecasts(const models::AeModel<float>& model,
                                const models::FeatureData& data,
                                const std::vector<std::size_t>& anchors,
                                const std::vector<std::size_t>& sites,
                                const std::vector<ingest::SiteMeta>& metas) {
    EvalPairs out;
    out.pred.resize(model.cfg.horizon);
    out.truth.resize(model.cfg.horizon);
    for (std::size_t a : anchors) {
        const auto frames = models::ae_window_frames(data, a, model.cfg.t_in);
        const auto fwd = model.forward(frames);
        for (std::size_t k = 0; k < model.cfg.horizon; ++k) {
            for (std::size_t s : sites) {
                const auto& m = metas.at(s);
                const std::size_t idx =
                    static_cast<std::size_t>(m.py) * data.geo.width + m.px;
                out.pred[k].push_back(fwd.maps[k].data[idx]);
                out.truth[k].push_back(truth_at(data, a + 1 + k, m.px, m.py));
            }
        }
    }
    return out;
}

EvalPairs collect_site_forecasts(const models::SiteLstm<float>& model,
                                 const models::FeatureData& data,
                                 const std::vector<std::size_t>& anchors,
                                 const std::vector<std::size_t>& sites,
                                 const std::vector<ingest::SiteMeta>& metas) {
    EvalPairs out;
    out.pred.resize(model.cfg.horizon);
    out.truth.resize(model.cfg.horizon);
    for (std::size_t s : sites) {
        const auto& m = metas.at(s);
        for (std::size_t a : anchors) {
            const auto steps = models::site_window_steps(data, s, a, model.cfg.t_in);
            const auto fwd = model.forward(steps);
            for (std::size_t k = 0; k < model.cfg.horizon; ++k) {
                out.pred[k].push_back(fwd.preds.data[k]);
                out.truth[k].push_back(truth_at(data, a + 1 + k, m.px, m.py));
            }
        }
    }
    return out;
}

std::vector<MetricRow> rows_from_pairs(const std::string& model, double fraction,
                                       std::uint64_t seed, const EvalPairs& pairs) {
    std::vector<MetricRow> rows;
    std::vector<double> all_pred, all_truth;
    for (std::size_t k = 0; k < pairs.pred.size(); ++k) {
        all_pred.insert(all_pred.end(), pairs.pred[k].begin(), pairs.pred[k].end());
        all_truth.insert(all_truth.end(), pairs.truth[k].begin(), pairs.truth[k].end());
    }
    const auto push = [&](std::size_t horizon, const MetricSummary& m) {
        rows.push_back({model, fraction, seed, horizon, m.rmse, m.mae, m.r2, m.pearson, m.n});
    };
    push(0, metrics(all_pred, all_truth));
    for (std::size_t k = 0; k < pairs.pred.size(); ++k) {
        push(k + 1, metrics(pairs.pred[k], pairs.truth[k]));
    }
    return rows;
}

std::vector<MetricRow> mean_baseline_rows(const models::FeatureData& data,
                                          const models::SplitSpec& split,
                                          const std::vector<std::size_t>& anchors,
                                          std::size_t horizon,
                                          const std::vector<ingest::SiteMeta>& metas,
                                          double fraction, float theta_r, float theta_s) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t s : split.train_sites) {
        for (std::size_t d = split.train_day_start; d < split.holdout_day_start; ++d) {
            const float v = data.site_target[s][d];
            if (std::isfinite(v)) {
                sum += v;
                ++n;
            }
        }
    }
    const double mean = n > 0 ? sum / static_cast<double>(n) : 0.5 * (theta_r + theta_s);
    EvalPairs pairs;
    pairs.pred.resize(horizon);
    pairs.truth.resize(horizon);
    for (std::size_t s : split.holdout_sites) {
        const auto& m = metas.at(s);
        for (std::size_t a : anchors) {
            for (std::size_t k = 0; k < horizon; ++k) {
                pairs.pred[k].push_back(mean);
                pairs.truth[k].push_back(truth_at(data, a + 1 + k, m.px, m.py));
            }
        }
    }
    return rows_from_pairs("mean", fraction, 0, pairs);
}

MetricReport ablation_experiment(const sim::World& world, const AblationConfig& cfg) {
    MetricReport report;
    const ingest::AlignedDataset aligned =
        ingest::align_daily(world.sites, world.sensors, world.weather, world.scenes);

    const std::size_t window_need =
        std::max(cfg.ae.t_in + cfg.ae.horizon, cfg.lstm.t_in + cfg.lstm.horizon);

    for (double fraction : cfg.fractions) {
        const models::SplitSpec split =
            models::make_split(aligned.n_days(), world.sites.size(), cfg.holdout_day_fraction,
                               cfg.holdout_site_every, fraction);
        const std::size_t span = split.holdout_day_start - split.train_day_start;
        if (span < window_need) {
            report.warnings.push_back("fraction " + fmt_g(fraction) + ": training span of " +
                                      std::to_string(span) + " days is shorter than the " +
                                      std::to_string(window_need) +
                                      "-day input+horizon window; skipped");
            continue;
        }

        const models::FeatureData data = models::build_feature_data(
            aligned, world.scenes, &world.truth, split.train_day_start, split.holdout_day_start);

        models::AeConfig acfg = cfg.ae;
        acfg.height = data.geo.height;
        acfg.width = data.geo.width;
        acfg.validate();

        const auto ae_train = models::train_anchors(split, acfg.t_in, acfg.horizon);
        const auto ae_eval = models::holdout_anchors(split, data.n_days(), acfg.t_in, acfg.horizon);
        const auto lstm_train = models::train_anchors(split, cfg.lstm.t_in, cfg.lstm.horizon);
        const auto lstm_eval =
            models::holdout_anchors(split, data.n_days(), cfg.lstm.t_in, cfg.lstm.horizon);
        const auto windows =
            models::site_windows(data, split.train_sites, lstm_train, cfg.lstm.horizon);
        if (ae_train.empty() || windows.empty()) {
            report.warnings.push_back("fraction " + fmt_g(fraction) +
                                      ": no usable training windows; skipped");
            continue;
        }

        const auto mean_rows =
            mean_baseline_rows(data, split, lstm_eval, cfg.lstm.horizon, world.sites, fraction,
                               cfg.lstm.theta_r, cfg.lstm.theta_s);
        report.rows.insert(report.rows.end(), mean_rows.begin(), mean_rows.end());

        for (std::uint64_t seed : cfg.seeds) {
            models::AeModel<float> ae(acfg);
            ae.init(seed);
            models::FitConfig af = cfg.ae_fit;
            af.seed = seed;
            models::fit_ae(ae, data, ae_train, af);
            const auto ae_rows = rows_from_pairs(
                "ae", fraction, seed,
                collect_map_forecasts(ae, data, ae_eval, split.holdout_sites, world.sites));
            report.rows.insert(report.rows.end(), ae_rows.begin(), ae_rows.end());

            models::SiteLstm<float> lstm(cfg.lstm);
            lstm.init(seed);
            models::FitConfig lf = cfg.lstm_fit;
            lf.seed = seed;
            models::fit_site_lstm(lstm, data, windows, lf);
            const auto lstm_rows = rows_from_pairs(
                "lstm", fraction, seed,
                collect_site_forecasts(lstm, data, lstm_eval, split.holdout_sites, world.sites));
            report.rows.insert(report.rows.end(), lstm_rows.begin(), lstm_rows.end());
        }
    }
    return report;
}

void write_report_csv(const MetricReport& report, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("report: cannot open " + path.string() + " for writing");
    f << "model,fraction,seed,horizon,rmse,mae,r2,pearson,n\n";
    for (const auto& r : report.rows) {
        f << r.model << ',' << fmt_g(r.fraction) << ',' << r.seed << ',' << r.horizon << ','
          << fmt_full(r.rmse) << ',' << fmt_full(r.mae) << ',' << fmt_full(r.r2) << ','
          << fmt_full(r.pearson) << ',' << r.n << '\n';
    }
    if (!f) throw IoError("report: short write to " + path.string());
}

nlohmann::ordered_json report_summary(const MetricReport& report) {
    // (model, fraction, horizon) cell -> rows across seeds.
    std::map<std::string, std::map<std::string, std::map<std::string, std::vector<const MetricRow*>>>>
        cells;
    for (const auto& r : report.rows) {
        cells[r.model][fmt_g(r.fraction)][std::to_string(r.horizon)].push_back(&r);
    }

    const auto mean_std = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        if (xs.size() > 1) {
            for (double x : xs) var += (x - mean) * (x - mean);
            var /= static_cast<double>(xs.size() - 1);
        }
        return std::pair<double, double>{mean, std::sqrt(var)};
    };

    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    nlohmann::ordered_json body = nlohmann::ordered_json::object();
    for (const auto& [model, by_fraction] : cells) {
        nlohmann::ordered_json mj = nlohmann::ordered_json::object();
        for (const auto& [fraction, by_horizon] : by_fraction) {
            nlohmann::ordered_json fj = nlohmann::ordered_json::object();
            for (const auto& [horizon, rows] : by_horizon) {
                std::vector<double> rmse, mae, r2, pearson;
                std::size_t n_total = 0;
                for (const MetricRow* r : rows) {
                    rmse.push_back(r->rmse);
                    mae.push_back(r->mae);
                    r2.push_back(r->r2);
                    pearson.push_back(r->pearson);
                    n_total += r->n;
                }
                const auto [rm, rs] = mean_std(rmse);
                const auto [mm, ms] = mean_std(mae);
                const auto [qm, qs] = mean_std(r2);
                const auto [pm, ps] = mean_std(pearson);
                fj[horizon] = {{"seeds", rows.size()},   {"rmse_mean", rm},
                               {"rmse_std", rs},         {"mae_mean", mm},
                               {"mae_std", ms},          {"r2_mean", qm},
                               {"r2_std", qs},           {"pearson_mean", pm},
                               {"pearson_std", ps},      {"n_total", n_total}};
            }
            mj[fraction] = std::move(fj);
        }
        body[model] = std::move(mj);
    }
    summary["cells"] = std::move(body);
    summary["warnings"] = report.warnings;
    return summary;
}

}  // namespace smcforge::eval
