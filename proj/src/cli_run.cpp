#include "smcforge/cli/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "smcforge/cube_io.hpp"
#include "smcforge/dates.hpp"
#include "smcforge/errors.hpp"
#include "smcforge/eval/experiment.hpp"
#include "smcforge/eval/heatmap.hpp"
#include "smcforge/models/dataset.hpp"

namespace fs = std::filesystem;

namespace smcforge::cli {
namespace {

// ---------------------------------------------------------------- parsing

/// Object wrapper that records which keys were consumed and rejects the
/// rest, so config typos cannot silently fall back to defaults.
class Strict {
public:
    Strict(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) {
            throw ValidationError("config: '" + name_ + "' must be a JSON object");
        }
    }

    template <class T>
    void get(const char* key, T& out) {
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        seen_.insert(key);
        try {
            out = it->get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ValidationError("config: key '" + path(key) + "' has the wrong type");
        }
    }

    /// Marks a nested section as consumed; nullptr when absent.
    const nlohmann::json* sub(const char* key) {
        const auto it = j_.find(key);
        if (it == j_.end()) return nullptr;
        seen_.insert(key);
        return &*it;
    }

    void done() const {
        for (const auto& el : j_.items()) {
            if (!seen_.contains(el.key())) {
                throw ValidationError("config: unknown key '" + path(el.key()) + "'");
            }
        }
    }

    [[nodiscard]] std::string path(const std::string& key) const {
        return name_.empty() ? key : name_ + "." + key;
    }

private:
    const nlohmann::json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

void parse_fit(const nlohmann::json& j, const std::string& name, models::FitConfig& fc) {
    Strict s(j, name);
    s.get("epochs", fc.epochs);
    s.get("lr", fc.lr);
    s.get("clip_norm", fc.clip_norm);
    s.get("windows_per_epoch", fc.windows_per_epoch);
    s.done();
}

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// ------------------------------------------------------------- filesystem

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_json_file(const nlohmann::ordered_json& j, const fs::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << j.dump(2) << '\n';
    if (!f) throw IoError("short write to '" + path.string() + "'");
}

std::uint64_t fnv1a(const std::vector<char>& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : bytes) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

// --------------------------------------------------------------- manifest

void write_manifest(const RunConfig& cfg, const std::string& command,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs) {
    const auto rel_hashes = [&](const std::vector<fs::path>& paths) {
        std::map<std::string, std::string> m;  // sorted for stable output
        for (const fs::path& p : paths) {
            m[fs::relative(p, cfg.workdir).generic_string()] = file_hash(p);
        }
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        for (const auto& [k, v] : m) j[k] = v;
        return j;
    };

    nlohmann::ordered_json m;
    m["command"] = command;
    m["seeds"] = {{"sim", cfg.sim.seed}, {"train", cfg.train_seed}, {"eval", cfg.eval_seeds}};
    m["inputs"] = rel_hashes(inputs);
    m["outputs"] = rel_hashes(outputs);
    m["config"] = config_to_json(cfg);
    ensure_dir(cfg.workdir / "manifests");
    write_json_file(m, cfg.workdir / "manifests" / (command + ".json"));
}

// ------------------------------------------------------------ world + data

fs::path world_dir(const RunConfig& cfg) { return cfg.workdir / "world"; }

std::vector<fs::path> world_files(const RunConfig& cfg) {
    const fs::path d = world_dir(cfg);
    return {d / "scenes.smc1", d / "truth.smc1",   d / "sensors.csv",
            d / "weather.csv", d / "sites.csv",    d / "world.json"};
}

sim::WorldFiles require_world(const RunConfig& cfg) {
    const fs::path d = world_dir(cfg);
    if (!fs::exists(d / "world.json")) {
        throw ValidationError("no simulated world under '" + d.string() +
                              "'; run `smcforge simulate` first");
    }
    return sim::load_world(d);
}

struct Pipeline {
    sim::WorldFiles wf;
    ingest::AlignedDataset aligned;
    models::SplitSpec split;
    models::FeatureData data;
};

Pipeline load_pipeline(const RunConfig& cfg) {
    Pipeline p{require_world(cfg), {}, {}, {}};
    p.aligned = ingest::align_daily(p.wf.sites, p.wf.sensors, p.wf.weather, p.wf.scenes,
                                    cfg.max_gap_days);
    p.split = models::make_split(p.aligned.n_days(), p.wf.sites.size(), cfg.holdout_day_fraction,
                                 cfg.holdout_site_every, 1.0);
    p.data = models::build_feature_data(p.aligned, p.wf.scenes, &p.wf.truth, p.split.train_day_start,
                                        p.split.holdout_day_start);
    return p;
}

models::AeConfig ae_config_for(const RunConfig& cfg, const raster::GridGeo& geo) {
    models::AeConfig acfg = cfg.ae;
    acfg.height = geo.height;
    acfg.width = geo.width;
    acfg.validate();
    return acfg;
}

bool wants(const RunConfig& cfg, const char* model) {
    return cfg.train_model == model || cfg.train_model == "both";
}

fs::path ae_ckpt(const RunConfig& cfg) { return cfg.workdir / "checkpoints" / "ae.ckpt"; }
fs::path lstm_ckpt(const RunConfig& cfg) { return cfg.workdir / "checkpoints" / "lstm.ckpt"; }

void require_checkpoint(const fs::path& path, const char* model) {
    if (!fs::exists(path)) {
        throw ValidationError("no trained " + std::string(model) + " checkpoint at '" +
                              path.string() + "'; run `smcforge train` first");
    }
}

/// A checkpoint trained under a different normalization would silently feed
/// the model shifted inputs; refuse instead.
void require_matching_stats(const features::ChannelStats& ckpt, const features::ChannelStats& now,
                            const char* model) {
    if (features::stats_to_json(ckpt) != features::stats_to_json(now)) {
        throw ValidationError(std::string(model) +
                              " checkpoint was trained with different feature statistics than "
                              "this config/world produces; re-run `smcforge train`");
    }
}

std::size_t predict_anchor(const RunConfig& cfg, const ingest::AlignedDataset& aligned,
                           std::size_t t_in) {
    std::size_t anchor = aligned.n_days() - 1;
    if (!cfg.predict_date.empty()) {
        const std::int64_t idx = aligned.index_of(dates::parse_iso_date(cfg.predict_date));
        if (idx < 0) {
            throw ValidationError("predict date " + cfg.predict_date +
                                  " lies outside the data window");
        }
        anchor = static_cast<std::size_t>(idx);
    }
    if (anchor + 1 < t_in) {
        throw ValidationError("not enough history before " +
                              dates::format_iso_date(aligned.days[anchor]) + ": need " +
                              std::to_string(t_in) + " days of record");
    }
    return anchor;
}

raster::Raster2D map_to_raster(const nn::Tensor<float>& t, const raster::GridGeo& geo) {
    return raster::Raster2D(geo, t.data);
}

}  // namespace

// ----------------------------------------------------------- RunConfig

RunConfig::RunConfig() {
    ae_fit.epochs = 30;
    ae_fit.lr = 3e-3;
    ae_fit.windows_per_epoch = 64;
    lstm_fit.epochs = 30;
    lstm_fit.lr = 3e-3;
    lstm_fit.windows_per_epoch = 300;
}

RunConfig parse_run_config(const nlohmann::json& doc) {
    RunConfig cfg;
    Strict top(doc, "");

    if (const auto* j = top.sub("sim")) {
        Strict s(*j, "sim");
        s.get("width", cfg.sim.grid.width);
        s.get("height", cfg.sim.grid.height);
        s.get("pixel_size", cfg.sim.grid.pixel_size);
        s.get("n_sites", cfg.sim.n_sites);
        s.get("n_regions", cfg.sim.n_regions);
        s.get("days", cfg.sim.days);
        s.get("revisit_s1", cfg.sim.revisit_s1);
        s.get("revisit_s2", cfg.sim.revisit_s2);
        s.get("seed", cfg.sim.seed);
        s.get("noise_db", cfg.sim.noise_db);
        s.get("optical_noise", cfg.sim.optical_noise);
        s.get("sensor_noise", cfg.sim.sensor_noise);
        std::string start_date;
        s.get("start_date", start_date);
        if (!start_date.empty()) cfg.sim.start_day = dates::parse_iso_date(start_date);
        if (const auto* sj = s.sub("soil")) {
            Strict soil(*sj, "sim.soil");
            soil.get("theta_r", cfg.soil.theta_r);
            soil.get("theta_s", cfg.soil.theta_s);
            soil.get("k_infil", cfg.soil.k_infil);
            soil.get("k_drain", cfg.soil.k_drain);
            soil.get("kc", cfg.soil.kc);
            soil.done();
        }
        if (const auto* cj = s.sub("crops")) {
            if (!cj->is_array() || cj->empty()) {
                throw ValidationError("config: 'sim.crops' must be a non-empty array");
            }
            cfg.crops.clear();
            for (std::size_t i = 0; i < cj->size(); ++i) {
                Strict crop((*cj)[i], "sim.crops[" + std::to_string(i) + "]");
                sim::CropPhenology c;
                crop.get("ndvi_min", c.ndvi_min);
                crop.get("ndvi_max", c.ndvi_max);
                crop.get("peak_doy", c.peak_doy);
                crop.get("width_days", c.width_days);
                crop.done();
                cfg.crops.push_back(c);
            }
        }
        s.done();
    }

    if (const auto* j = top.sub("features")) {
        Strict s(*j, "features");
        s.get("max_gap_days", cfg.max_gap_days);
        s.get("crop_ndvi_threshold", cfg.crop_ndvi_threshold);
        s.get("ndvi_date", cfg.ndvi_date);
        s.done();
    }

    if (const auto* j = top.sub("ae")) {
        Strict s(*j, "ae");
        s.get("stem1", cfg.ae.stem1);
        s.get("stem2", cfg.ae.stem2);
        s.get("hidden", cfg.ae.hidden);
        s.get("up1", cfg.ae.up1);
        s.get("kernel", cfg.ae.kernel);
        s.get("t_in", cfg.ae.t_in);
        s.get("horizon", cfg.ae.horizon);
        s.get("flatten_mode", cfg.ae.flatten_mode);
        s.get("theta_r", cfg.ae.theta_r);
        s.get("theta_s", cfg.ae.theta_s);
        s.done();
    }

    if (const auto* j = top.sub("lstm")) {
        Strict s(*j, "lstm");
        s.get("hidden", cfg.lstm.hidden);
        s.get("t_in", cfg.lstm.t_in);
        s.get("horizon", cfg.lstm.horizon);
        s.get("theta_r", cfg.lstm.theta_r);
        s.get("theta_s", cfg.lstm.theta_s);
        s.done();
    }

    if (const auto* j = top.sub("train")) {
        Strict s(*j, "train");
        s.get("model", cfg.train_model);
        s.get("seed", cfg.train_seed);
        if (const auto* fj = s.sub("ae")) parse_fit(*fj, "train.ae", cfg.ae_fit);
        if (const auto* fj = s.sub("lstm")) parse_fit(*fj, "train.lstm", cfg.lstm_fit);
        s.done();
    }

    if (const auto* j = top.sub("eval")) {
        Strict s(*j, "eval");
        s.get("fractions", cfg.fractions);
        s.get("seeds", cfg.eval_seeds);
        s.get("holdout_day_fraction", cfg.holdout_day_fraction);
        s.get("holdout_site_every", cfg.holdout_site_every);
        s.get("predict_date", cfg.predict_date);
        s.done();
    }

    if (const auto* j = top.sub("paths")) {
        Strict s(*j, "paths");
        std::string wd;
        s.get("workdir", wd);
        if (!wd.empty()) cfg.workdir = wd;
        s.done();
    }

    top.done();

    cfg.sim.validate();
    cfg.soil.validate();
    for (const auto& c : cfg.crops) c.validate();
    cfg.lstm.validate();
    if (cfg.train_model != "ae" && cfg.train_model != "lstm" && cfg.train_model != "both") {
        throw ValidationError("config: 'train.model' must be \"ae\", \"lstm\" or \"both\", got \"" +
                              cfg.train_model + "\"");
    }
    if (cfg.fractions.empty()) throw ValidationError("config: 'eval.fractions' must not be empty");
    for (double f : cfg.fractions) {
        if (!(f > 0.0) || f > 1.0) {
            throw ValidationError("config: 'eval.fractions' entries must lie in (0, 1], got " +
                                  fmt_num(f));
        }
    }
    if (cfg.eval_seeds.empty()) throw ValidationError("config: 'eval.seeds' must not be empty");
    if (!(cfg.holdout_day_fraction > 0.0) || cfg.holdout_day_fraction >= 1.0) {
        throw ValidationError("config: 'eval.holdout_day_fraction' must lie in (0, 1)");
    }
    if (cfg.holdout_site_every < 2) {
        throw ValidationError("config: 'eval.holdout_site_every' must be at least 2");
    }
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config file '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(doc);
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json crops = nlohmann::ordered_json::array();
    for (const auto& c : cfg.crops) {
        crops.push_back({{"ndvi_min", c.ndvi_min},
                         {"ndvi_max", c.ndvi_max},
                         {"peak_doy", c.peak_doy},
                         {"width_days", c.width_days}});
    }
    j["sim"] = {{"width", cfg.sim.grid.width},
                {"height", cfg.sim.grid.height},
                {"pixel_size", cfg.sim.grid.pixel_size},
                {"n_sites", cfg.sim.n_sites},
                {"n_regions", cfg.sim.n_regions},
                {"days", cfg.sim.days},
                {"revisit_s1", cfg.sim.revisit_s1},
                {"revisit_s2", cfg.sim.revisit_s2},
                {"seed", cfg.sim.seed},
                {"noise_db", cfg.sim.noise_db},
                {"optical_noise", cfg.sim.optical_noise},
                {"sensor_noise", cfg.sim.sensor_noise},
                {"start_date", dates::format_iso_date(cfg.sim.start_day)},
                {"soil",
                 {{"theta_r", cfg.soil.theta_r},
                  {"theta_s", cfg.soil.theta_s},
                  {"k_infil", cfg.soil.k_infil},
                  {"k_drain", cfg.soil.k_drain},
                  {"kc", cfg.soil.kc}}},
                {"crops", crops}};
    j["features"] = {{"max_gap_days", cfg.max_gap_days},
                     {"crop_ndvi_threshold", cfg.crop_ndvi_threshold},
                     {"ndvi_date", cfg.ndvi_date}};
    j["ae"] = {{"stem1", cfg.ae.stem1},   {"stem2", cfg.ae.stem2},
               {"hidden", cfg.ae.hidden}, {"up1", cfg.ae.up1},
               {"kernel", cfg.ae.kernel}, {"t_in", cfg.ae.t_in},
               {"horizon", cfg.ae.horizon}, {"flatten_mode", cfg.ae.flatten_mode},
               {"theta_r", cfg.ae.theta_r}, {"theta_s", cfg.ae.theta_s}};
    j["lstm"] = {{"hidden", cfg.lstm.hidden},
                 {"t_in", cfg.lstm.t_in},
                 {"horizon", cfg.lstm.horizon},
                 {"theta_r", cfg.lstm.theta_r},
                 {"theta_s", cfg.lstm.theta_s}};
    const auto fit_json = [](const models::FitConfig& fc) {
        return nlohmann::ordered_json{{"epochs", fc.epochs},
                                      {"lr", fc.lr},
                                      {"clip_norm", fc.clip_norm},
                                      {"windows_per_epoch", fc.windows_per_epoch}};
    };
    j["train"] = {{"model", cfg.train_model},
                  {"seed", cfg.train_seed},
                  {"ae", fit_json(cfg.ae_fit)},
                  {"lstm", fit_json(cfg.lstm_fit)}};
    j["eval"] = {{"fractions", cfg.fractions},
                 {"seeds", cfg.eval_seeds},
                 {"holdout_day_fraction", cfg.holdout_day_fraction},
                 {"holdout_site_every", cfg.holdout_site_every},
                 {"predict_date", cfg.predict_date}};
    j["paths"] = {{"workdir", cfg.workdir.generic_string()}};
    return j;
}

void apply_overrides(RunConfig& cfg, const std::optional<std::uint64_t>& seed,
                     const std::optional<std::string>& workdir) {
    if (seed) {
        cfg.sim.seed = *seed;
        cfg.train_seed = *seed;
    }
    if (workdir) {
        if (workdir->empty()) throw ValidationError("--workdir must not be empty");
        cfg.workdir = *workdir;
    }
}

std::string file_hash(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read '" + path.string() + "' for hashing");
    const std::vector<char> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

// ----------------------------------------------------------- commands

void cmd_simulate(const RunConfig& cfg) {
    const sim::World world = sim::generate_world(cfg.sim, cfg.soil, cfg.crops);
    ensure_dir(world_dir(cfg));
    sim::save_world(world, world_dir(cfg));
    write_manifest(cfg, "simulate", {}, world_files(cfg));
}

void cmd_train(const RunConfig& cfg) {
    const Pipeline p = load_pipeline(cfg);
    ensure_dir(cfg.workdir / "checkpoints");
    std::vector<fs::path> outputs;

    if (wants(cfg, "ae")) {
        const models::AeConfig acfg = ae_config_for(cfg, p.data.geo);
        const auto anchors = models::train_anchors(p.split, acfg.t_in, acfg.horizon);
        models::AeModel<float> model(acfg);
        model.init(cfg.train_seed);
        models::FitConfig fc = cfg.ae_fit;
        fc.seed = cfg.train_seed;
        const models::FitResult res = models::fit_ae(model, p.data, anchors, fc);
        nlohmann::ordered_json extra{{"train_seed", cfg.train_seed},
                                     {"train_windows", anchors.size()},
                                     {"loss_trace", res.loss_trace}};
        models::save_ae_checkpoint(model, p.data.stats, extra, ae_ckpt(cfg));
        outputs.push_back(ae_ckpt(cfg));
    }
    if (wants(cfg, "lstm")) {
        const auto anchors = models::train_anchors(p.split, cfg.lstm.t_in, cfg.lstm.horizon);
        const auto windows =
            models::site_windows(p.data, p.split.train_sites, anchors, cfg.lstm.horizon);
        models::SiteLstm<float> model(cfg.lstm);
        model.init(cfg.train_seed);
        models::FitConfig fc = cfg.lstm_fit;
        fc.seed = cfg.train_seed;
        const models::FitResult res = models::fit_site_lstm(model, p.data, windows, fc);
        nlohmann::ordered_json extra{{"train_seed", cfg.train_seed},
                                     {"train_windows", windows.size()},
                                     {"loss_trace", res.loss_trace}};
        models::save_site_lstm_checkpoint(model, p.data.stats, extra, lstm_ckpt(cfg));
        outputs.push_back(lstm_ckpt(cfg));
    }
    write_manifest(cfg, "train", world_files(cfg), outputs);
}

void cmd_predict(const RunConfig& cfg) {
    if (wants(cfg, "ae")) require_checkpoint(ae_ckpt(cfg), "ae");
    if (wants(cfg, "lstm")) require_checkpoint(lstm_ckpt(cfg), "lstm");

    const Pipeline p = load_pipeline(cfg);
    ensure_dir(cfg.workdir / "forecasts");
    std::vector<fs::path> inputs = world_files(cfg);
    std::vector<fs::path> outputs;

    if (wants(cfg, "ae")) {
        features::ChannelStats ckpt_stats;
        const models::AeModel<float> model = models::load_ae_checkpoint(ae_ckpt(cfg), &ckpt_stats);
        require_matching_stats(ckpt_stats, p.data.stats, "ae");
        inputs.push_back(ae_ckpt(cfg));

        const std::size_t anchor = predict_anchor(cfg, p.aligned, model.cfg.t_in);
        const auto frames = models::ae_window_frames(p.data, anchor, model.cfg.t_in);
        const auto fwd = model.forward(frames);

        raster::SceneSeries fc;
        fc.cadence_days = 1;
        for (std::size_t k = 0; k < model.cfg.horizon; ++k) {
            const std::int64_t day = p.aligned.days[anchor] + 1 + static_cast<std::int64_t>(k);
            raster::RasterStack st;
            st.timestamp = day;
            st.channels.emplace_back(raster::ChannelId::SMC_MAP,
                                     map_to_raster(fwd.maps[k], p.data.geo));
            fc.stacks.push_back(std::move(st));

            const fs::path png =
                cfg.workdir / "forecasts" / ("forecast_ae_" + dates::format_iso_date(day) + ".png");
            eval::render_heatmap(map_to_raster(fwd.maps[k], p.data.geo), model.cfg.theta_r,
                                 model.cfg.theta_s, png);
            outputs.push_back(png);
        }
        const fs::path cube = cfg.workdir / "forecasts" / "forecast_ae.smc1";
        raster::cube_write(fc, cube);
        outputs.push_back(cube);
    }

    if (wants(cfg, "lstm")) {
        features::ChannelStats ckpt_stats;
        const models::SiteLstm<float> model =
            models::load_site_lstm_checkpoint(lstm_ckpt(cfg), &ckpt_stats);
        require_matching_stats(ckpt_stats, p.data.stats, "lstm");
        inputs.push_back(lstm_ckpt(cfg));

        const std::size_t anchor = predict_anchor(cfg, p.aligned, model.cfg.t_in);
        std::vector<raster::Raster2D> maps(
            model.cfg.horizon, raster::Raster2D::filled(p.data.geo));
        std::string csv = "site_id,date,smc\n";
        for (std::size_t s = 0; s < p.wf.sites.size(); ++s) {
            const auto steps = models::site_window_steps(p.data, s, anchor, model.cfg.t_in);
            const auto fwd = model.forward(steps);
            for (std::size_t k = 0; k < model.cfg.horizon; ++k) {
                const std::int64_t day = p.aligned.days[anchor] + 1 + static_cast<std::int64_t>(k);
                maps[k].set(p.wf.sites[s].px, p.wf.sites[s].py, fwd.preds.data[k]);
                csv += p.wf.sites[s].site_id + "," + dates::format_iso_date(day) + "," +
                       fmt_num(fwd.preds.data[k]) + "\n";
            }
        }
        raster::SceneSeries fc;
        fc.cadence_days = 1;
        for (std::size_t k = 0; k < model.cfg.horizon; ++k) {
            const std::int64_t day = p.aligned.days[anchor] + 1 + static_cast<std::int64_t>(k);
            raster::RasterStack st;
            st.timestamp = day;
            st.channels.emplace_back(raster::ChannelId::SMC_MAP, maps[k]);
            fc.stacks.push_back(std::move(st));
            const fs::path png = cfg.workdir / "forecasts" /
                                 ("forecast_lstm_" + dates::format_iso_date(day) + ".png");
            eval::render_heatmap(maps[k], model.cfg.theta_r, model.cfg.theta_s, png);
            outputs.push_back(png);
        }
        const fs::path cube = cfg.workdir / "forecasts" / "forecast_lstm.smc1";
        raster::cube_write(fc, cube);
        outputs.push_back(cube);
        const fs::path csv_path = cfg.workdir / "forecasts" / "forecast_lstm.csv";
        std::ofstream f(csv_path, std::ios::trunc);
        if (!f) throw IoError("cannot open '" + csv_path.string() + "' for writing");
        f << csv;
        if (!f) throw IoError("short write to '" + csv_path.string() + "'");
        outputs.push_back(csv_path);
    }

    write_manifest(cfg, "predict", inputs, outputs);
}

void cmd_evaluate(const RunConfig& cfg) {
    if (wants(cfg, "ae")) require_checkpoint(ae_ckpt(cfg), "ae");
    if (wants(cfg, "lstm")) require_checkpoint(lstm_ckpt(cfg), "lstm");

    const Pipeline p = load_pipeline(cfg);
    ensure_dir(cfg.workdir / "reports");
    std::vector<fs::path> inputs = world_files(cfg);

    eval::MetricReport report;
    std::size_t baseline_horizon = cfg.lstm.horizon;

    if (wants(cfg, "ae")) {
        features::ChannelStats ckpt_stats;
        const models::AeModel<float> model = models::load_ae_checkpoint(ae_ckpt(cfg), &ckpt_stats);
        require_matching_stats(ckpt_stats, p.data.stats, "ae");
        inputs.push_back(ae_ckpt(cfg));
        const auto anchors =
            models::holdout_anchors(p.split, p.data.n_days(), model.cfg.t_in, model.cfg.horizon);
        const auto rows = eval::rows_from_pairs(
            "ae", 1.0, cfg.train_seed,
            eval::collect_map_forecasts(model, p.data, anchors, p.split.holdout_sites, p.wf.sites));
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());
        baseline_horizon = model.cfg.horizon;
    }
    if (wants(cfg, "lstm")) {
        features::ChannelStats ckpt_stats;
        const models::SiteLstm<float> model =
            models::load_site_lstm_checkpoint(lstm_ckpt(cfg), &ckpt_stats);
        require_matching_stats(ckpt_stats, p.data.stats, "lstm");
        inputs.push_back(lstm_ckpt(cfg));
        const auto anchors =
            models::holdout_anchors(p.split, p.data.n_days(), model.cfg.t_in, model.cfg.horizon);
        const auto rows = eval::rows_from_pairs(
            "lstm", 1.0, cfg.train_seed,
            eval::collect_site_forecasts(model, p.data, anchors, p.split.holdout_sites,
                                         p.wf.sites));
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());
        baseline_horizon = model.cfg.horizon;
    }

    const auto base_anchors =
        models::holdout_anchors(p.split, p.data.n_days(), cfg.lstm.t_in, baseline_horizon);
    const auto mean_rows =
        eval::mean_baseline_rows(p.data, p.split, base_anchors, baseline_horizon, p.wf.sites, 1.0,
                                 cfg.lstm.theta_r, cfg.lstm.theta_s);
    report.rows.insert(report.rows.end(), mean_rows.begin(), mean_rows.end());

    const fs::path csv = cfg.workdir / "reports" / "metrics.csv";
    const fs::path json = cfg.workdir / "reports" / "metrics.json";
    eval::write_report_csv(report, csv);
    write_json_file(eval::report_summary(report), json);
    write_manifest(cfg, "evaluate", inputs, {csv, json});
}

void cmd_compare(const RunConfig& cfg) {
    const sim::WorldFiles wf = require_world(cfg);
    ensure_dir(cfg.workdir / "reports");

    sim::World world;
    world.cfg = wf.cfg;
    world.soil = wf.soil;
    world.crops = wf.crops;
    world.scenes = wf.scenes;
    world.truth = wf.truth;
    world.sites = wf.sites;
    world.sensors = wf.sensors;
    world.weather = wf.weather;

    eval::AblationConfig acfg;
    acfg.fractions = cfg.fractions;
    acfg.seeds = cfg.eval_seeds;
    acfg.holdout_day_fraction = cfg.holdout_day_fraction;
    acfg.holdout_site_every = cfg.holdout_site_every;
    acfg.ae = cfg.ae;
    acfg.lstm = cfg.lstm;
    acfg.ae_fit = cfg.ae_fit;
    acfg.lstm_fit = cfg.lstm_fit;

    const eval::MetricReport report = eval::ablation_experiment(world, acfg);
    for (const std::string& w : report.warnings) {
        std::fputs(("warning: " + w + "\n").c_str(), stderr);
    }

    const fs::path csv = cfg.workdir / "reports" / "ablation.csv";
    const fs::path json = cfg.workdir / "reports" / "ablation.json";
    eval::write_report_csv(report, csv);
    write_json_file(eval::report_summary(report), json);
    write_manifest(cfg, "compare", world_files(cfg), {csv, json});
}

void cmd_ndvi_map(const RunConfig& cfg) {
    const sim::WorldFiles wf = require_world(cfg);
    ensure_dir(cfg.workdir / "reports");

    const std::int64_t limit = cfg.ndvi_date.empty()
                                   ? std::numeric_limits<std::int64_t>::max()
                                   : dates::parse_iso_date(cfg.ndvi_date);
    const auto has_data = [](const raster::Raster2D* r) {
        return r != nullptr && r->mean_valid().has_value();
    };
    const raster::RasterStack* pick = nullptr;
    for (const auto& st : wf.scenes.stacks) {
        if (st.timestamp > limit) break;
        if (has_data(st.find(raster::ChannelId::NDVI)) ||
            (has_data(st.find(raster::ChannelId::NIR)) &&
             has_data(st.find(raster::ChannelId::RED)))) {
            pick = &st;
        }
    }
    if (pick == nullptr) {
        throw ValidationError(cfg.ndvi_date.empty()
                                  ? "no optical acquisition in the scene series"
                                  : "no optical acquisition at or before " + cfg.ndvi_date);
    }

    raster::Raster2D plane = has_data(pick->find(raster::ChannelId::NDVI))
                                 ? *pick->find(raster::ChannelId::NDVI)
                                 : features::ndvi(*pick->find(raster::ChannelId::NIR),
                                                  *pick->find(raster::ChannelId::RED));

    // Crop-stress view: non-crop pixels go neutral gray, crop pixels are
    // colored by greenness (blue = vigorous, red = stressed).
    const raster::Raster2D mask = features::crop_mask(plane, cfg.crop_ndvi_threshold);
    for (std::size_t i = 0; i < plane.values().size(); ++i) {
        if (!(mask.values()[i] > 0.5f)) {
            plane.values()[i] = std::numeric_limits<float>::quiet_NaN();
        }
    }

    const fs::path png = cfg.workdir / "reports" /
                         ("ndvi_" + dates::format_iso_date(pick->timestamp) + ".png");
    eval::render_heatmap(plane, 0.0f, 1.0f, png);
    write_manifest(cfg, "ndvi-map", world_files(cfg), {png});
}

void run_command(const std::string& name, const RunConfig& cfg) {
    if (name == "simulate") return cmd_simulate(cfg);
    if (name == "train") return cmd_train(cfg);
    if (name == "predict") return cmd_predict(cfg);
    if (name == "evaluate") return cmd_evaluate(cfg);
    if (name == "compare") return cmd_compare(cfg);
    if (name == "ndvi-map") return cmd_ndvi_map(cfg);
    throw ValidationError("unknown command '" + name + "'");
}

}  // namespace smcforge::cli
