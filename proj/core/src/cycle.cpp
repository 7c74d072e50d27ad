#include "gzsl/cycle.hpp"

#include <algorithm>
#include <cmath>

#include "gzsl/error.hpp"
#include "gzsl/log.hpp"
#include "gzsl/net_io.hpp"
#include "gzsl/ops.hpp"

namespace gzsl::cycle {

using namespace gzsl::ad;

std::vector<Tensor> CycleModel::gen_params() const { return params_of(gen); }
std::vector<Tensor> CycleModel::critic_params() const { return params_of(critic); }
std::vector<Tensor> CycleModel::reg_params() const { return params_of(reg); }

CycleModel make_cycle_model(std::size_t visual_dim, std::size_t semantic_dim,
                            const CycleConfig& cfg, Rng& rng) {
    if (visual_dim == 0 || semantic_dim == 0)
        throw ContractError("make_cycle_model: dimensions must be positive");
    CycleModel m;
    m.noise_dim = cfg.noise_dim == 0 ? semantic_dim : cfg.noise_dim;
    m.gen = make_mlp({semantic_dim + m.noise_dim, cfg.gen_hidden, visual_dim},
                     Activation::leaky_relu, Activation::relu, rng);
    m.critic = make_mlp({visual_dim + semantic_dim, cfg.critic_hidden, 1},
                        Activation::leaky_relu, Activation::identity, rng);
    m.reg = make_dense(visual_dim, semantic_dim, Activation::identity, rng);
    return m;
}

Tensor draw_gen_noise(std::size_t rows, const CycleModel& m, Rng& rng) {
    Tensor eps = Tensor::zeros({rows, m.noise_dim});
    rng.fill_normal(eps.values());
    return eps;
}

Tensor generate(const CycleModel& m, const Tensor& semantic_rows, const Tensor& noise) {
    if (semantic_rows.rank() != 2 || noise.rank() != 2 ||
        semantic_rows.dim(0) != noise.dim(0) || noise.dim(1) != m.noise_dim)
        throw ShapeError("generate: semantics " + shape_str(semantic_rows.shape()) +
                         " and noise " + shape_str(noise.shape()) + " do not pair");
    return m.gen.forward(concat_cols(semantic_rows, noise));
}

Tensor generate(const CycleModel& m, const Tensor& semantic_rows, Rng& rng) {
    return generate(m, semantic_rows, draw_gen_noise(semantic_rows.dim(0), m, rng));
}

Tensor critic_score(const CycleModel& m, const Tensor& features, const Tensor& semantics) {
    return m.critic.forward(concat_cols(features, semantics));
}

CriticLosses critic_losses(const CycleModel& m, const ConditionedBatch& real,
                           const ConditionedBatch& fake) {
    Tensor real_score = mean_all(critic_score(m, real.features, real.semantics));
    Tensor fake_score = mean_all(critic_score(m, fake.features, fake.semantics));
    return {sub(fake_score, real_score), scale(fake_score, -1.0)};
}

Tensor regress(const CycleModel& m, const Tensor& features) {
    return forward_dense(m.reg, features);
}

Tensor cycle_loss(const Tensor& semantics, const Tensor& regressed) {
    if (semantics.shape() != regressed.shape())
        throw ShapeError("cycle_loss: shapes " + shape_str(semantics.shape()) + " vs " +
                         shape_str(regressed.shape()));
    const std::size_t batch = semantics.dim(0);
    return scale(sum_all(square(sub(semantics, regressed))),
                 1.0 / static_cast<double>(batch));
}

namespace {

Tensor detach(const Tensor& t) {
    const auto v = t.data();
    return Tensor::from_data(t.shape(), std::vector<double>(v.begin(), v.end()));
}

} // namespace

double critic_update(CycleModel& m, AdamState& critic_adam, const ConditionedBatch& real,
                     const CycleConfig& cfg, Rng& rng) {
    Tensor fake = generate(m, real.semantics, rng);
    ConditionedBatch fake_batch{detach(fake), real.semantics};
    CriticLosses losses = critic_losses(m, real, fake_batch);
    std::vector<Tensor> params = m.critic_params();
    zero_grad(params);
    backward(losses.critic_loss);
    adam_step(params, critic_adam);
    clip_weights(params, cfg.clip_c);
    return losses.critic_loss.value();
}

std::pair<double, double> generator_update(CycleModel& m, AdamState& gen_adam,
                                           const Tensor& semantics, const CycleConfig& cfg,
                                           Rng& rng) {
    Tensor fake = generate(m, semantics, rng);
    Tensor gen_loss = scale(mean_all(critic_score(m, fake, semantics)), -1.0);
    Tensor cyc = cycle_loss(semantics, regress(m, fake));
    Tensor objective = add(gen_loss, scale(cyc, cfg.gamma_cyc));

    std::vector<Tensor> params = m.gen_params();
    for (const Tensor& t : m.reg_params()) params.push_back(t);
    zero_grad(params);
    backward(objective);
    adam_step(params, gen_adam);
    return {gen_loss.value(), cyc.value()};
}

CycleTrainResult train_cycle(const data::Dataset& ds, const CycleConfig& cfg) {
    {
        const auto violations = data::validate_splits(ds);
        if (!violations.empty())
            throw DataError("train_cycle: dataset failed validation: " + violations.front());
    }
    if (cfg.batch_size == 0) throw ContractError("train_cycle: batch_size must be positive");
    if (cfg.n_critic == 0) throw ContractError("train_cycle: n_critic must be positive");

    std::vector<std::uint32_t> rows = data::effective_train_idx(ds);
    if (rows.empty())
        throw ContractError("train_cycle: no training rows outside the validation classes");

    Rng rng(cfg.seed);
    CycleTrainResult result;
    result.model = make_cycle_model(ds.visual_dim, ds.semantic_dim, cfg, rng);

    AdamState critic_adam = make_adam(result.model.critic_params(), cfg.lr);
    std::vector<Tensor> gen_and_reg = result.model.gen_params();
    for (const Tensor& t : result.model.reg_params()) gen_and_reg.push_back(t);
    AdamState gen_adam = make_adam(gen_and_reg, cfg.lr);

    for (int epoch = 0; epoch < static_cast<int>(cfg.epochs); ++epoch) {
        rng.shuffle(rows);
        double critic_sum = 0, gen_sum = 0, cyc_sum = 0;
        std::size_t critic_steps = 0, gen_steps = 0;
        for (std::size_t start = 0; start < rows.size(); start += cfg.batch_size) {
            const std::size_t b = std::min(cfg.batch_size, rows.size() - start);
            std::vector<double> feat(b * ds.visual_dim), sem(b * ds.semantic_dim);
            for (std::size_t i = 0; i < b; ++i) {
                const auto vr = ds.visual_row(rows[start + i]);
                std::copy(vr.begin(), vr.end(), feat.begin() + i * ds.visual_dim);
                const auto sr = ds.semantic_row(ds.labels[rows[start + i]]);
                std::copy(sr.begin(), sr.end(), sem.begin() + i * ds.semantic_dim);
            }
            ConditionedBatch real{Tensor::from_data({b, ds.visual_dim}, std::move(feat)),
                                  Tensor::from_data({b, ds.semantic_dim}, std::move(sem))};

            const double closs = critic_update(result.model, critic_adam, real, cfg, rng);
            if (!std::isfinite(closs))
                throw NumericError("train_cycle: non-finite critic loss at epoch " +
                                   std::to_string(epoch));
            critic_sum += closs;
            critic_steps += 1;

            if (critic_steps % cfg.n_critic == 0) {
                const auto [gloss, cyc] =
                    generator_update(result.model, gen_adam, real.semantics, cfg, rng);
                if (!std::isfinite(gloss) || !std::isfinite(cyc))
                    throw NumericError("train_cycle: non-finite generator loss at epoch " +
                                       std::to_string(epoch));
                gen_sum += gloss;
                cyc_sum += cyc;
                gen_steps += 1;
            }
        }
        CycleEpochLoss entry;
        entry.critic = critic_steps ? critic_sum / static_cast<double>(critic_steps) : 0.0;
        if (gen_steps == 0) {
            log_info("cycle epoch " + std::to_string(epoch) +
                     ": too few batches for a generator update");
        } else {
            entry.generator = gen_sum / static_cast<double>(gen_steps);
            entry.cycle = cyc_sum / static_cast<double>(gen_steps);
        }
        result.history.push_back(entry);
        log_debug("cycle epoch " + std::to_string(epoch) + " critic " +
                  std::to_string(entry.critic) + " gen " + std::to_string(entry.generator));
    }
    return result;
}

LabeledFeatures synth_features(const CycleModel& m, const data::Dataset& ds,
                               const std::vector<std::uint32_t>& classes,
                               std::size_t n_per_class, Rng& rng) {
    const std::size_t L = ds.semantic_dim;
    if (L != m.semantic_dim())
        throw ShapeError("synth_features: dataset semantic dim " + std::to_string(L) +
                         " does not match model " + std::to_string(m.semantic_dim()));
    if (classes.empty() || n_per_class == 0) {
        LabeledFeatures empty;
        empty.features = Tensor::zeros({0, m.visual_dim()});
        return empty;
    }

    LabeledFeatures out;
    std::vector<double> feats;
    feats.reserve(classes.size() * n_per_class * m.visual_dim());
    for (std::uint32_t cls : classes) {
        if (cls >= ds.num_classes())
            throw ContractError("synth_features: class " + std::to_string(cls) +
                                " has no semantic row");
        std::vector<double> sem(n_per_class * L);
        const auto row = ds.semantic_row(cls);
        for (std::size_t i = 0; i < n_per_class; ++i)
            std::copy(row.begin(), row.end(), sem.begin() + i * L);
        Tensor generated =
            generate(m, Tensor::from_data({n_per_class, L}, std::move(sem)), rng);
        const auto g = generated.data();
        feats.insert(feats.end(), g.begin(), g.end());
        for (std::size_t i = 0; i < n_per_class; ++i) out.labels.push_back(cls);
    }
    out.features = Tensor::from_data({classes.size() * n_per_class, m.visual_dim()},
                                     std::move(feats));
    return out;
}

Checkpoint to_checkpoint(const CycleModel& m) {
    Checkpoint ckpt;
    checkpoint_add_mlp(ckpt, "gen", m.gen);
    checkpoint_add_mlp(ckpt, "critic", m.critic);
    checkpoint_add_dense(ckpt, "reg", m.reg);
    return ckpt;
}

CycleModel cycle_from_checkpoint(const Checkpoint& ckpt) {
    CycleModel m;
    m.gen = mlp_from_checkpoint(ckpt, "gen", Activation::leaky_relu, Activation::relu);
    m.critic = mlp_from_checkpoint(ckpt, "critic", Activation::leaky_relu, Activation::identity);
    m.reg = dense_from_checkpoint(ckpt, "reg", Activation::identity);
    m.noise_dim = m.gen.in_dim() - m.reg.out_dim();
    if (m.gen.in_dim() <= m.reg.out_dim() || m.reg.in_dim() != m.gen.out_dim() ||
        m.critic.in_dim() != m.gen.out_dim() + m.reg.out_dim())
        throw DataError("checkpoint generator/critic/regressor dimensions disagree");
    return m;
}

} // namespace gzsl::cycle
