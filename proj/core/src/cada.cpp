#include "gzsl/cada.hpp"

#include <algorithm>
#include <cmath>

#include "gzsl/adam.hpp"
#include "gzsl/error.hpp"
#include "gzsl/log.hpp"
#include "gzsl/net_io.hpp"
#include "gzsl/ops.hpp"

namespace gzsl::cada {

using namespace gzsl::ad;

double warmup_weight(const WarmupSchedule& s, int epoch) {
    if (s.end_epoch < s.start_epoch)
        throw ContractError("warmup schedule ends before it starts");
    if (epoch < s.start_epoch) return 0.0;
    const int e = std::min(epoch, s.end_epoch);
    return s.rate * static_cast<double>(e - s.start_epoch);
}

CadaModel make_cada_model(std::size_t visual_dim, std::size_t semantic_dim,
                          const CadaConfig& cfg, Rng& rng) {
    if (visual_dim == 0 || semantic_dim == 0 || cfg.latent_dim == 0)
        throw ContractError("make_cada_model: dimensions must be positive");
    CadaModel m;
    m.enc_x_trunk = make_mlp({visual_dim, cfg.enc_hidden_visual}, Activation::relu,
                             Activation::relu, rng);
    m.enc_x_mu = make_dense(cfg.enc_hidden_visual, cfg.latent_dim, Activation::identity, rng);
    m.enc_x_logvar = make_dense(cfg.enc_hidden_visual, cfg.latent_dim, Activation::identity, rng);
    m.enc_a_trunk = make_mlp({semantic_dim, cfg.enc_hidden_semantic}, Activation::relu,
                             Activation::relu, rng);
    m.enc_a_mu = make_dense(cfg.enc_hidden_semantic, cfg.latent_dim, Activation::identity, rng);
    m.enc_a_logvar =
        make_dense(cfg.enc_hidden_semantic, cfg.latent_dim, Activation::identity, rng);
    m.dec_x = make_mlp({cfg.latent_dim, cfg.dec_hidden_visual, visual_dim}, Activation::relu,
                       Activation::identity, rng);
    m.dec_a = make_mlp({cfg.latent_dim, cfg.dec_hidden_semantic, semantic_dim},
                       Activation::relu, Activation::identity, rng);
    return m;
}

std::vector<Tensor> CadaModel::params() const {
    std::vector<Tensor> out;
    append_params(out, enc_x_trunk);
    append_params(out, enc_x_mu);
    append_params(out, enc_x_logvar);
    append_params(out, enc_a_trunk);
    append_params(out, enc_a_mu);
    append_params(out, enc_a_logvar);
    append_params(out, dec_x);
    append_params(out, dec_a);
    return out;
}

std::vector<NamedParam> CadaModel::named_params() const {
    const Checkpoint ckpt = to_checkpoint(*this);
    std::vector<NamedParam> out;
    for (const auto& [name, t] : ckpt.arrays) out.push_back({name, t});
    return out;
}

GaussianLatent encode(const CadaModel& m, Modality mod, const Tensor& inputs) {
    const Mlp& trunk = (mod == Modality::visual) ? m.enc_x_trunk : m.enc_a_trunk;
    const DenseLayer& mu = (mod == Modality::visual) ? m.enc_x_mu : m.enc_a_mu;
    const DenseLayer& logvar = (mod == Modality::visual) ? m.enc_x_logvar : m.enc_a_logvar;
    Tensor h = trunk.forward(inputs);
    return {forward_dense(mu, h), forward_dense(logvar, h)};
}

Tensor decode(const CadaModel& m, Modality mod, const Tensor& z) {
    return (mod == Modality::visual) ? m.dec_x.forward(z) : m.dec_a.forward(z);
}

Tensor reparameterize(const GaussianLatent& g, const Tensor& eps) {
    if (eps.shape() != g.mu.shape())
        throw ShapeError("reparameterize: noise " + shape_str(eps.shape()) +
                         " does not match latent " + shape_str(g.mu.shape()));
    const Tensor sigma = exp_of(scale(g.log_var, 0.5));
    return add(g.mu, mul(sigma, eps));
}

Tensor draw_noise(std::size_t rows, std::size_t cols, Rng& rng) {
    Tensor eps = Tensor::zeros({rows, cols});
    rng.fill_normal(eps.values());
    return eps;
}

Tensor kl_term(const GaussianLatent& g) {
    const std::size_t batch = g.mu.dim(0);
    // mu^2 + sigma^2 - 1 - log sigma^2, with sigma^2 = exp(log_var)
    Tensor t = sub(add(square(g.mu), exp_of(g.log_var)), add_scalar(g.log_var, 1.0));
    return scale(sum_all(t), 0.5 / static_cast<double>(batch));
}

namespace {

Tensor pair_distance(const Tensor& target, const Tensor& decoded, bool l2,
                     std::size_t batch) {
    Tensor diff = sub(target, decoded);
    Tensor per_entry = l2 ? square(diff) : abs_of(diff);
    return scale(sum_all(per_entry), 1.0 / static_cast<double>(batch));
}

} // namespace

Tensor cross_alignment_loss(const CadaModel& m, const Batch& batch, const Tensor& z_x,
                            const Tensor& z_a, bool l2) {
    const std::size_t b = batch.visual.dim(0);
    Tensor x_from_a = decode(m, Modality::visual, z_a);
    Tensor a_from_x = decode(m, Modality::semantic, z_x);
    return add(pair_distance(batch.visual, x_from_a, l2, b),
               pair_distance(batch.semantic, a_from_x, l2, b));
}

Tensor cross_alignment_loss(const CadaModel& m, const Batch& batch, Rng& rng, bool l2) {
    const std::size_t b = batch.visual.dim(0);
    GaussianLatent gx = encode(m, Modality::visual, batch.visual);
    GaussianLatent ga = encode(m, Modality::semantic, batch.semantic);
    Tensor z_x = reparameterize(gx, draw_noise(b, gx.mu.dim(1), rng));
    Tensor z_a = reparameterize(ga, draw_noise(b, ga.mu.dim(1), rng));
    return cross_alignment_loss(m, batch, z_x, z_a, l2);
}

Tensor distribution_alignment_loss(const GaussianLatent& from_visual,
                                   const GaussianLatent& from_semantic) {
    if (from_visual.mu.shape() != from_semantic.mu.shape())
        throw ShapeError("distribution_alignment_loss: latent shapes differ, " +
                         shape_str(from_visual.mu.shape()) + " vs " +
                         shape_str(from_semantic.mu.shape()));
    const std::size_t batch = from_visual.mu.dim(0);
    Tensor mean_part = sum_all(square(sub(from_visual.mu, from_semantic.mu)));
    Tensor sigma_x = exp_of(scale(from_visual.log_var, 0.5));
    Tensor sigma_a = exp_of(scale(from_semantic.log_var, 0.5));
    Tensor sigma_part = sum_all(square(sub(sigma_x, sigma_a)));
    return scale(add(mean_part, sigma_part), 1.0 / static_cast<double>(batch));
}

CadaLosses total_loss(const CadaModel& m, const Batch& batch, int epoch,
                      const CadaConfig& cfg, const Tensor& eps_x, const Tensor& eps_a) {
    if (batch.visual.rank() != 2 || batch.semantic.rank() != 2 ||
        batch.visual.dim(0) != batch.semantic.dim(0))
        throw ShapeError("total_loss: batch shapes " + shape_str(batch.visual.shape()) +
                         " and " + shape_str(batch.semantic.shape()) + " are not row-paired");
    const std::size_t b = batch.visual.dim(0);

    GaussianLatent gx = encode(m, Modality::visual, batch.visual);
    GaussianLatent ga = encode(m, Modality::semantic, batch.semantic);
    Tensor z_x = reparameterize(gx, eps_x);
    Tensor z_a = reparameterize(ga, eps_a);

    Tensor recon = add(
        pair_distance(batch.visual, decode(m, Modality::visual, z_x), false, b),
        pair_distance(batch.semantic, decode(m, Modality::semantic, z_a), false, b));
    Tensor kl = add(kl_term(gx), kl_term(ga));
    Tensor cross = cross_alignment_loss(m, batch, z_x, z_a, cfg.cross_l2);
    Tensor dist = distribution_alignment_loss(gx, ga);

    const double beta = warmup_weight(cfg.beta_schedule, epoch);
    const double gamma = warmup_weight(cfg.gamma_schedule, epoch);
    const double delta = warmup_weight(cfg.delta_schedule, epoch);
    Tensor total =
        add(add(recon, scale(kl, beta)), add(scale(cross, gamma), scale(dist, delta)));
    return {recon, kl, cross, dist, total};
}

namespace {

Tensor gather_rows(const data::Dataset& ds, std::span<const std::uint32_t> rows,
                   std::size_t start, std::size_t count) {
    std::vector<double> buf(count * ds.visual_dim);
    for (std::size_t i = 0; i < count; ++i) {
        const auto row = ds.visual_row(rows[start + i]);
        std::copy(row.begin(), row.end(), buf.begin() + i * ds.visual_dim);
    }
    return Tensor::from_data({count, ds.visual_dim}, std::move(buf));
}

Tensor gather_class_semantics(const data::Dataset& ds, std::span<const std::uint32_t> rows,
                              std::size_t start, std::size_t count) {
    std::vector<double> buf(count * ds.semantic_dim);
    for (std::size_t i = 0; i < count; ++i) {
        const auto row = ds.semantic_row(ds.labels[rows[start + i]]);
        std::copy(row.begin(), row.end(), buf.begin() + i * ds.semantic_dim);
    }
    return Tensor::from_data({count, ds.semantic_dim}, std::move(buf));
}

} // namespace

CadaTrainResult train_cada(const data::Dataset& ds, const CadaConfig& cfg) {
    {
        const auto violations = data::validate_splits(ds);
        if (!violations.empty())
            throw DataError("train_cada: dataset failed validation: " + violations.front());
    }
    if (cfg.batch_size == 0) throw ContractError("train_cada: batch_size must be positive");

    std::vector<std::uint32_t> rows = data::effective_train_idx(ds);
    if (rows.empty())
        throw ContractError("train_cada: no training rows outside the validation classes");

    Rng rng(cfg.seed);
    CadaTrainResult result;
    result.model = make_cada_model(ds.visual_dim, ds.semantic_dim, cfg, rng);
    std::vector<Tensor> params = result.model.params();
    AdamState adam = make_adam(params, cfg.lr);

    for (int epoch = 0; epoch < static_cast<int>(cfg.epochs); ++epoch) {
        rng.shuffle(rows);
        LossBreakdown sums;
        std::size_t n_rows = 0;
        for (std::size_t start = 0; start < rows.size(); start += cfg.batch_size) {
            const std::size_t b = std::min(cfg.batch_size, rows.size() - start);
            Batch batch{gather_rows(ds, rows, start, b),
                        gather_class_semantics(ds, rows, start, b)};
            Tensor eps_x = draw_noise(b, cfg.latent_dim, rng);
            Tensor eps_a = draw_noise(b, cfg.latent_dim, rng);
            CadaLosses losses = total_loss(result.model, batch, epoch, cfg, eps_x, eps_a);
            const double total = losses.weighted_total.value();
            if (!std::isfinite(total))
                throw NumericError("train_cada: non-finite loss at epoch " +
                                   std::to_string(epoch));
            zero_grad(params);
            backward(losses.weighted_total);
            adam_step(params, adam);

            const double bd = static_cast<double>(b);
            sums.recon += losses.recon.value() * bd;
            sums.kl += losses.kl.value() * bd;
            sums.cross += losses.cross.value() * bd;
            sums.dist += losses.dist.value() * bd;
            sums.weighted_total += total * bd;
            n_rows += b;
        }
        const double n = static_cast<double>(n_rows);
        result.history.push_back({sums.recon / n, sums.kl / n, sums.cross / n, sums.dist / n,
                                  sums.weighted_total / n});
        log_debug("cada epoch " + std::to_string(epoch) + " loss " +
                  std::to_string(result.history.back().weighted_total));
    }
    return result;
}

Tensor sample_latents(const CadaModel& m, Modality mod, const Tensor& inputs,
                      std::size_t n_per_input, Rng& rng) {
    if (n_per_input == 0) throw ContractError("sample_latents: n_per_input must be positive");
    GaussianLatent g = encode(m, mod, inputs);
    const std::size_t rows = g.mu.dim(0), z = g.mu.dim(1);
    const auto mu = g.mu.data();
    const auto lv = g.log_var.data();
    std::vector<double> out(rows * n_per_input * z);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < n_per_input; ++k)
            for (std::size_t d = 0; d < z; ++d) {
                const double sigma = std::exp(0.5 * lv[r * z + d]);
                out[(r * n_per_input + k) * z + d] = mu[r * z + d] + sigma * rng.normal();
            }
    return Tensor::from_data({rows * n_per_input, z}, std::move(out));
}

Tensor latent_means(const CadaModel& m, Modality mod, const Tensor& inputs) {
    GaussianLatent g = encode(m, mod, inputs);
    const auto mu = g.mu.data();
    return Tensor::from_data(g.mu.shape(), std::vector<double>(mu.begin(), mu.end()));
}

Checkpoint to_checkpoint(const CadaModel& m) {
    Checkpoint ckpt;
    checkpoint_add_mlp(ckpt, "enc_x.trunk", m.enc_x_trunk);
    checkpoint_add_dense(ckpt, "enc_x.mu", m.enc_x_mu);
    checkpoint_add_dense(ckpt, "enc_x.logvar", m.enc_x_logvar);
    checkpoint_add_mlp(ckpt, "enc_a.trunk", m.enc_a_trunk);
    checkpoint_add_dense(ckpt, "enc_a.mu", m.enc_a_mu);
    checkpoint_add_dense(ckpt, "enc_a.logvar", m.enc_a_logvar);
    checkpoint_add_mlp(ckpt, "dec_x", m.dec_x);
    checkpoint_add_mlp(ckpt, "dec_a", m.dec_a);
    return ckpt;
}

CadaModel cada_from_checkpoint(const Checkpoint& ckpt) {
    CadaModel m;
    m.enc_x_trunk =
        mlp_from_checkpoint(ckpt, "enc_x.trunk", Activation::relu, Activation::relu);
    m.enc_x_mu = dense_from_checkpoint(ckpt, "enc_x.mu", Activation::identity);
    m.enc_x_logvar = dense_from_checkpoint(ckpt, "enc_x.logvar", Activation::identity);
    m.enc_a_trunk =
        mlp_from_checkpoint(ckpt, "enc_a.trunk", Activation::relu, Activation::relu);
    m.enc_a_mu = dense_from_checkpoint(ckpt, "enc_a.mu", Activation::identity);
    m.enc_a_logvar = dense_from_checkpoint(ckpt, "enc_a.logvar", Activation::identity);
    m.dec_x = mlp_from_checkpoint(ckpt, "dec_x", Activation::relu, Activation::identity);
    m.dec_a = mlp_from_checkpoint(ckpt, "dec_a", Activation::relu, Activation::identity);
    if (m.enc_x_mu.out_dim() != m.enc_a_mu.out_dim() ||
        m.enc_x_mu.out_dim() != m.dec_x.in_dim() || m.dec_x.in_dim() != m.dec_a.in_dim())
        throw DataError("checkpoint encoder/decoder latent dimensions disagree");
    return m;
}

} // namespace gzsl::cada
