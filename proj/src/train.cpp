#include "smcforge/models/train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smcforge/errors.hpp"
#include "smcforge/nn/adam.hpp"
#include "smcforge/nn/checkpoint.hpp"
#include "smcforge/nn/ops.hpp"
#include "smcforge/rng.hpp"

namespace smcforge::models {

namespace {

constexpr std::uint64_t kShuffleTag = 0x5A11;
constexpr std::uint64_t kTeacherTag = 0x7EAC;

template <typename T>
std::vector<T> epoch_subset(std::vector<T> order, rng::Key key, std::size_t cap) {
    rng::Sequence seq(key);
    seq.shuffle(order);
    if (cap > 0 && order.size() > cap) order.resize(cap);
    return order;
}

[[noreturn]] void abort_non_finite(const char* what, std::size_t epoch, std::size_t window) {
    throw ValidationError(std::string(what) + ": non-finite loss at epoch " +
                          std::to_string(epoch) + ", window " + std::to_string(window) +
                          " (inputs or learning rate out of range)");
}

}  // namespace

double teacher_forcing_probability(std::size_t epoch, std::size_t total_epochs) {
    if (total_epochs == 0) return 0.0;
    const double half = static_cast<double>(total_epochs) / 2.0;
    return std::max(0.0, 1.0 - static_cast<double>(epoch) / half);
}

FitResult fit_ae(AeModel<float>& model, const FeatureData& data,
                 const std::vector<std::size_t>& anchors, const FitConfig& fc) {
    if (anchors.empty()) throw ValidationError("ae training: no training windows");
    if (!data.has_truth) throw ValidationError("ae training: dataset has no truth maps");
    const std::size_t t_in = model.cfg.t_in;
    const std::size_t horizon = model.cfg.horizon;
    for (std::size_t a : anchors) {
        if (a + 1 < t_in || a + horizon >= data.n_days()) {
            throw ValidationError("ae training: anchor " + std::to_string(a) +
                                  " cannot host a T=" + std::to_string(t_in) +
                                  ", K=" + std::to_string(horizon) + " window");
        }
    }

    const rng::Key root(fc.seed);
    nn::Adam<float> adam(static_cast<float>(fc.lr));
    auto named = model.named_params();
    std::vector<nn::Tensor<float>*> params;
    for (auto& [name, t] : named) params.push_back(t);

    FitResult result;
    result.loss_trace.reserve(fc.epochs);
    const float inv_k = 1.0f / static_cast<float>(horizon);

    for (std::size_t epoch = 0; epoch < fc.epochs; ++epoch) {
        const std::vector<std::size_t> order =
            epoch_subset(anchors, root.derive(kShuffleTag).derive(epoch), fc.windows_per_epoch);
        const double p_teacher = teacher_forcing_probability(epoch, fc.epochs);

        double epoch_loss = 0.0;
        for (std::size_t a : order) {
            const std::vector<nn::Tensor<float>> frames = ae_window_frames(data, a, t_in);

            std::vector<const nn::Tensor<float>*> teacher(horizon, nullptr);
            for (std::size_t j = 0; j + 1 < horizon; ++j) {
                const double u = rng::uniform01(
                    root.derive(kTeacherTag).derive(epoch).derive(a).derive(j));
                if (u < p_teacher) teacher[j] = &data.truth_maps[a + 1 + j];
            }

            AeForward<float> fwd = model.forward(frames, teacher, true);

            float loss = 0.0f;
            std::vector<nn::Tensor<float>> dmaps;
            dmaps.reserve(horizon);
            for (std::size_t k = 0; k < horizon; ++k) {
                const nn::Tensor<float>& target = data.truth_maps[a + 1 + k];
                const nn::Tensor<float>& mask = data.truth_mask[a + 1 + k];
                loss += inv_k * nn::masked_mse(fwd.maps[k], target, mask);
                nn::Tensor<float> d(fwd.maps[k].shape);
                nn::masked_mse_backward(fwd.maps[k], target, mask, inv_k, d);
                dmaps.push_back(std::move(d));
            }
            if (!std::isfinite(loss)) abort_non_finite("ae training", epoch, a);

            AeParams<float> grads = model.zero_grads();
            model.backward(fwd, dmaps, grads);
            auto grad_named = AeModel<float>::named_tensors(model.cfg, grads);
            std::vector<nn::Tensor<float>*> grad_list;
            for (auto& [name, t] : grad_named) grad_list.push_back(t);
            adam.step(params, grad_list, static_cast<float>(fc.clip_norm));

            epoch_loss += static_cast<double>(loss);
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    return result;
}

FitResult fit_site_lstm(SiteLstm<float>& model, const FeatureData& data,
                        const std::vector<std::pair<std::size_t, std::size_t>>& windows,
                        const FitConfig& fc) {
    if (windows.empty()) throw ValidationError("site lstm training: no training windows");
    const std::size_t t_in = model.cfg.t_in;
    const std::size_t horizon = model.cfg.horizon;
    for (const auto& [s, a] : windows) {
        if (s >= data.n_sites() || a + 1 < t_in || a + horizon >= data.n_days()) {
            throw ValidationError("site lstm training: window (site " + std::to_string(s) +
                                  ", anchor " + std::to_string(a) + ") out of range");
        }
    }

    const rng::Key root(fc.seed);
    nn::Adam<float> adam(static_cast<float>(fc.lr));
    auto named = model.named_params();
    std::vector<nn::Tensor<float>*> params;
    for (auto& [name, t] : named) params.push_back(t);

    FitResult result;
    result.loss_trace.reserve(fc.epochs);

    for (std::size_t epoch = 0; epoch < fc.epochs; ++epoch) {
        const auto order =
            epoch_subset(windows, root.derive(kShuffleTag).derive(epoch), fc.windows_per_epoch);

        double epoch_loss = 0.0;
        for (const auto& [site, a] : order) {
            const std::vector<nn::Tensor<float>> steps = site_window_steps(data, site, a, t_in);

            nn::Tensor<float> target({horizon});
            nn::Tensor<float> mask({horizon});
            for (std::size_t j = 0; j < horizon; ++j) {
                const float v = data.site_target[site][a + 1 + j];
                target.data[j] = std::isfinite(v) ? v : 0.0f;
                mask.data[j] = std::isfinite(v) ? 1.0f : 0.0f;
            }

            SiteLstmForward<float> fwd = model.forward(steps, true);
            const float loss = nn::masked_mse(fwd.preds, target, mask);
            if (!std::isfinite(loss)) abort_non_finite("site lstm training", epoch, a);

            nn::Tensor<float> dpreds({horizon});
            nn::masked_mse_backward(fwd.preds, target, mask, 1.0f, dpreds);
            SiteLstmParams<float> grads = model.zero_grads();
            model.backward(fwd, dpreds, grads);

            auto grad_named = SiteLstm<float>::named_tensors(grads);
            std::vector<nn::Tensor<float>*> grad_list;
            for (auto& [name, t] : grad_named) grad_list.push_back(t);
            adam.step(params, grad_list, static_cast<float>(fc.clip_norm));

            epoch_loss += static_cast<double>(loss);
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

nlohmann::ordered_json ae_config_json(const AeConfig& cfg) {
    return nlohmann::ordered_json{
        {"in_channels", cfg.in_channels},
        {"height", cfg.height},
        {"width", cfg.width},
        {"stem1", cfg.stem1},
        {"stem2", cfg.stem2},
        {"hidden", cfg.hidden},
        {"up1", cfg.up1},
        {"kernel", cfg.kernel},
        {"t_in", cfg.t_in},
        {"horizon", cfg.horizon},
        {"feedback_channel", cfg.feedback_channel},
        {"flatten_mode", cfg.flatten_mode},
        {"theta_r", cfg.theta_r},
        {"theta_s", cfg.theta_s},
    };
}

AeConfig ae_config_from_json(const nlohmann::json& j) {
    AeConfig cfg;
    cfg.in_channels = j.at("in_channels").get<std::size_t>();
    cfg.height = j.at("height").get<std::size_t>();
    cfg.width = j.at("width").get<std::size_t>();
    cfg.stem1 = j.at("stem1").get<std::size_t>();
    cfg.stem2 = j.at("stem2").get<std::size_t>();
    cfg.hidden = j.at("hidden").get<std::size_t>();
    cfg.up1 = j.at("up1").get<std::size_t>();
    cfg.kernel = j.at("kernel").get<std::size_t>();
    cfg.t_in = j.at("t_in").get<std::size_t>();
    cfg.horizon = j.at("horizon").get<std::size_t>();
    cfg.feedback_channel = j.at("feedback_channel").get<std::size_t>();
    cfg.flatten_mode = j.at("flatten_mode").get<bool>();
    cfg.theta_r = j.at("theta_r").get<float>();
    cfg.theta_s = j.at("theta_s").get<float>();
    return cfg;
}

nlohmann::ordered_json lstm_config_json(const SiteLstmConfig& cfg) {
    return nlohmann::ordered_json{
        {"in_features", cfg.in_features}, {"hidden", cfg.hidden},
        {"horizon", cfg.horizon},         {"t_in", cfg.t_in},
        {"theta_r", cfg.theta_r},         {"theta_s", cfg.theta_s},
    };
}

SiteLstmConfig lstm_config_from_json(const nlohmann::json& j) {
    SiteLstmConfig cfg;
    cfg.in_features = j.at("in_features").get<std::size_t>();
    cfg.hidden = j.at("hidden").get<std::size_t>();
    cfg.horizon = j.at("horizon").get<std::size_t>();
    cfg.t_in = j.at("t_in").get<std::size_t>();
    cfg.theta_r = j.at("theta_r").get<float>();
    cfg.theta_s = j.at("theta_s").get<float>();
    return cfg;
}

template <typename NamedList>
void fill_checkpoint(nn::Checkpoint& ckpt, const NamedList& named) {
    for (const auto& [name, tensor] : named) ckpt.tensors.emplace(name, *tensor);
}

template <typename NamedList>
void read_checkpoint(const nn::Checkpoint& ckpt, const NamedList& named, const char* kind) {
    for (const auto& [name, tensor] : named) {
        const auto it = ckpt.tensors.find(name);
        if (it == ckpt.tensors.end()) {
            throw ValidationError(std::string(kind) + " checkpoint: missing tensor '" + name +
                                  "'");
        }
        if (!it->second.same_shape(*tensor)) {
            throw ValidationError(std::string(kind) + " checkpoint: tensor '" + name +
                                  "' has the wrong shape");
        }
        *tensor = it->second;
    }
}

}  // namespace

void save_ae_checkpoint(const AeModel<float>& model, const features::ChannelStats& stats,
                        const nlohmann::ordered_json& extra, const std::filesystem::path& path) {
    nn::Checkpoint ckpt;
    ckpt.meta["kind"] = "ae";
    ckpt.meta["config"] = ae_config_json(model.cfg);
    ckpt.meta["stats"] = features::stats_to_json(stats);
    if (!extra.is_null()) ckpt.meta["run"] = extra;
    auto named = AeModel<float>::named_tensors(model.cfg,
                                               const_cast<AeParams<float>&>(model.p));
    fill_checkpoint(ckpt, named);
    nn::save_checkpoint(ckpt, path);
}

AeModel<float> load_ae_checkpoint(const std::filesystem::path& path,
                                  features::ChannelStats* stats_out) {
    const nn::Checkpoint ckpt = nn::load_checkpoint(path);
    if (ckpt.meta.value("kind", "") != "ae") {
        throw ValidationError("checkpoint '" + path.string() + "' is not a map-forecaster");
    }
    AeModel<float> model(ae_config_from_json(ckpt.meta.at("config")));
    auto named = model.named_params();
    read_checkpoint(ckpt, named, "map-forecaster");
    if (stats_out != nullptr) *stats_out = features::stats_from_json(ckpt.meta.at("stats"));
    return model;
}

void save_site_lstm_checkpoint(const SiteLstm<float>& model, const features::ChannelStats& stats,
                               const nlohmann::ordered_json& extra,
                               const std::filesystem::path& path) {
    nn::Checkpoint ckpt;
    ckpt.meta["kind"] = "site_lstm";
    ckpt.meta["config"] = lstm_config_json(model.cfg);
    ckpt.meta["stats"] = features::stats_to_json(stats);
    if (!extra.is_null()) ckpt.meta["run"] = extra;
    auto named = SiteLstm<float>::named_tensors(const_cast<SiteLstmParams<float>&>(model.p));
    fill_checkpoint(ckpt, named);
    nn::save_checkpoint(ckpt, path);
}

SiteLstm<float> load_site_lstm_checkpoint(const std::filesystem::path& path,
                                          features::ChannelStats* stats_out) {
    const nn::Checkpoint ckpt = nn::load_checkpoint(path);
    if (ckpt.meta.value("kind", "") != "site_lstm") {
        throw ValidationError("checkpoint '" + path.string() + "' is not a site-forecaster");
    }
    SiteLstm<float> model(lstm_config_from_json(ckpt.meta.at("config")));
    auto named = model.named_params();
    read_checkpoint(ckpt, named, "site-forecaster");
    if (stats_out != nullptr) *stats_out = features::stats_from_json(ckpt.meta.at("stats"));
    return model;
}

}  // namespace smcforge::models
