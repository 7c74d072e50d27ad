#include "gzsl/gate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "gzsl/adam.hpp"
#include "gzsl/error.hpp"
#include "gzsl/log.hpp"
#include "gzsl/net_io.hpp"
#include "gzsl/ops.hpp"

namespace gzsl::gate {

namespace {

constexpr double kTempLo = 0.05;
constexpr double kTempHi = 20.0;
constexpr std::size_t kDcBatch = 128;

ad::Mlp make_dc_mlp(std::size_t latent_dim, const GateConfig& cfg, Rng& rng) {
    std::vector<std::size_t> dims{latent_dim};
    if (cfg.dc_hidden > 0) dims.push_back(cfg.dc_hidden);
    dims.push_back(2);
    return ad::make_mlp(dims, ad::Activation::relu, ad::Activation::identity, rng);
}

void append_rows(std::vector<double>& buf, const ad::Tensor& rows) {
    auto d = rows.data();
    buf.insert(buf.end(), d.begin(), d.end());
}

std::vector<std::uint32_t> sorted_vec(const std::set<std::uint32_t>& s) {
    return {s.begin(), s.end()};
}

// Mean NLL of the domain labels under softmax(logits / t). logits is [n x 2].
double domain_nll(const std::vector<double>& logits, const std::vector<DomainLabel>& labels,
                  double t) {
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double a = logits[2 * i] / t;
        const double b = logits[2 * i + 1] / t;
        const double hi = std::max(a, b);
        const double lse = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
        const double picked = labels[i] == DomainLabel::seen ? a : b;
        total += lse - picked;
    }
    return total / static_cast<double>(labels.size());
}

} // namespace

std::size_t DomainSet::count(DomainLabel d) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), d));
}

DomainSet build_dc_training_set(const LatentSpace& space, const data::Dataset& ds,
                                const GateConfig& cfg, Rng& rng) {
    if (ds.unseen_classes.empty()) {
        throw ContractError("build_dc_training_set: dataset has no unseen classes");
    }
    if (cfg.n_unseen_draws_per_class == 0) {
        throw ContractError("build_dc_training_set: n_unseen_draws_per_class must be >= 1");
    }

    std::vector<std::uint32_t> seen_train_classes;
    for (std::uint32_t c : ds.seen_classes) {
        if (!ds.val_classes.count(c)) seen_train_classes.push_back(c);
    }
    if (seen_train_classes.empty()) {
        throw ContractError("build_dc_training_set: every seen class is held out");
    }

    std::vector<double> buf;
    std::vector<DomainLabel> labels;

    const std::vector<std::uint32_t> train = data::effective_train_idx(ds);
    if (!train.empty()) {
        ad::Tensor encoded = space.sample_visual(data::visual_rows(ds, train), 1, rng);
        append_rows(buf, encoded);
        labels.insert(labels.end(), train.size(), DomainLabel::seen);
    }
    ad::Tensor seen_proj =
        space.sample_semantic(data::semantic_rows(ds, seen_train_classes), 1, rng);
    append_rows(buf, seen_proj);
    labels.insert(labels.end(), seen_train_classes.size(), DomainLabel::seen);

    const std::size_t seen_total = labels.size();
    const auto unseen = sorted_vec(ds.unseen_classes);
    std::size_t draws = cfg.n_unseen_draws_per_class;
    if (cfg.class_balance) {
        draws = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(
                   static_cast<double>(seen_total) / static_cast<double>(unseen.size()))));
    }
    ad::Tensor unseen_proj = space.sample_semantic(data::semantic_rows(ds, unseen), draws, rng);
    append_rows(buf, unseen_proj);
    labels.insert(labels.end(), unseen.size() * draws, DomainLabel::unseen);

    DomainSet set;
    set.latents = ad::Tensor::from_data({labels.size(), space.latent_dim}, std::move(buf));
    set.labels = std::move(labels);
    return set;
}

DomainSet build_calibration_set(const LatentSpace& space, const data::Dataset& ds,
                                const GateConfig& cfg, Rng& rng) {
    DomainSet set;
    if (ds.val_classes.empty()) {
        log_info("gate: no held-out classes; calibration set is empty");
        set.latents = ad::Tensor::from_data({0, space.latent_dim}, {});
        return set;
    }

    std::vector<std::uint32_t> val_rows, seen_rows;
    for (std::uint32_t i : ds.train_idx) {
        if (ds.val_classes.count(ds.labels[i])) {
            val_rows.push_back(i);
        } else {
            seen_rows.push_back(i);
        }
    }
    if (val_rows.empty()) {
        log_info("gate: held-out classes have no training rows; calibration set is empty");
        set.latents = ad::Tensor::from_data({0, space.latent_dim}, {});
        return set;
    }
    rng.shuffle(seen_rows);
    if (seen_rows.size() > val_rows.size()) seen_rows.resize(val_rows.size());
    std::sort(seen_rows.begin(), seen_rows.end());

    std::vector<double> buf;
    std::vector<DomainLabel> labels;
    if (!seen_rows.empty()) {
        append_rows(buf, space.embed_visual(data::visual_rows(ds, seen_rows)));
        labels.insert(labels.end(), seen_rows.size(), DomainLabel::seen);
    }
    append_rows(buf, space.embed_visual(data::visual_rows(ds, val_rows)));
    labels.insert(labels.end(), val_rows.size(), DomainLabel::unseen);

    set.latents = ad::Tensor::from_data({labels.size(), space.latent_dim}, std::move(buf));
    set.labels = std::move(labels);
    return set;
}

DomainClassifier train_dc(const DomainSet& set, const GateConfig& cfg,
                          std::vector<double>* loss_history) {
    const std::size_t n = set.labels.size();
    if (set.latents.rank() != 2 || set.latents.dim(0) != n) {
        throw ShapeError("train_dc: latents " + ad::shape_str(set.latents.shape()) +
                             " do not match " + std::to_string(n) + " labels");
    }
    if (set.count(DomainLabel::seen) == 0 || set.count(DomainLabel::unseen) == 0) {
        throw ContractError("train_dc: training set must contain both domains");
    }

    Rng rng(cfg.seed);
    DomainClassifier dc{make_dc_mlp(set.latents.dim(1), cfg, rng), 1.0};
    std::vector<ad::Tensor> params = ad::params_of(dc.mlp);
    ad::AdamState adam = ad::make_adam(params, cfg.dc_lr);

    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    const std::size_t latent_dim = set.latents.dim(1);
    auto latent_data = set.latents.data();

    for (std::size_t epoch = 0; epoch < cfg.dc_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += kDcBatch) {
            const std::size_t b = std::min(kDcBatch, n - start);
            std::vector<double> xb(b * latent_dim);
            std::vector<std::uint32_t> yb(b);
            for (std::size_t r = 0; r < b; ++r) {
                const std::uint32_t src = order[start + r];
                std::copy_n(latent_data.begin() + src * latent_dim, latent_dim,
                            xb.begin() + r * latent_dim);
                yb[r] = static_cast<std::uint32_t>(set.labels[src]);
            }
            ad::Tensor x = ad::Tensor::from_data({b, latent_dim}, std::move(xb));
            ad::Tensor loss = ad::softmax_cross_entropy(dc.mlp.forward(x), yb);
            if (!std::isfinite(loss.value())) {
                throw NumericError("train_dc: non-finite loss at epoch " + std::to_string(epoch));
            }
            ad::zero_grad(params);
            ad::backward(loss);
            ad::adam_step(params, adam);
            epoch_loss += loss.value() * static_cast<double>(b);
        }
        epoch_loss /= static_cast<double>(n);
        if (loss_history) loss_history->push_back(epoch_loss);
        log_debug("gate: epoch " + std::to_string(epoch) + " domain loss " +
                              std::to_string(epoch_loss));
    }
    return dc;
}

double calibrate(DomainClassifier& dc, const DomainSet& validation) {
    if (validation.labels.empty() || validation.count(DomainLabel::seen) == 0 ||
        validation.count(DomainLabel::unseen) == 0) {
        log_info("gate: warning: degenerate calibration set, keeping temperature 1");
        dc.temperature = 1.0;
        return dc.temperature;
    }

    ad::Tensor logits_t = dc.mlp.forward(validation.latents);
    auto span = logits_t.data();
    std::vector<double> logits(span.begin(), span.end());

    auto nll = [&](double t) { return domain_nll(logits, validation.labels, t); };

    // Golden-section minimization; nll is smooth in t, so the usual unimodal
    // caveat only costs us a slightly suboptimal local minimum at worst.
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = kTempLo, b = kTempHi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = nll(c), fd = nll(d);
    while (b - a > 1e-9) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = nll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = nll(d);
        }
    }
    dc.temperature = (a + b) / 2.0;
    log_info("gate: calibrated temperature " + std::to_string(dc.temperature));
    return dc.temperature;
}

std::vector<double> domain_probs(const DomainClassifier& dc, const ad::Tensor& latents) {
    if (dc.temperature <= 0) {
        throw ContractError("domain_probs: temperature must be positive");
    }
    ad::Tensor logits = dc.mlp.forward(latents);
    auto d = logits.data();
    std::vector<double> out(d.size());
    for (std::size_t i = 0; i < d.size() / 2; ++i) {
        const double a = d[2 * i] / dc.temperature;
        const double b = d[2 * i + 1] / dc.temperature;
        const double hi = std::max(a, b);
        const double ea = std::exp(a - hi), eb = std::exp(b - hi);
        out[2 * i] = ea / (ea + eb);
        out[2 * i + 1] = eb / (ea + eb);
    }
    return out;
}

std::pair<double, double> domain_prob(const DomainClassifier& dc, std::span<const double> z) {
    ad::Tensor one = ad::Tensor::from_data({1, z.size()}, {z.begin(), z.end()});
    auto p = domain_probs(dc, one);
    return {p[0], p[1]};
}

std::vector<double> gate(std::span<const double> p_class, double p_seen, double p_unseen,
                         std::span<const DomainLabel> class_domains) {
    if (p_class.size() != class_domains.size()) {
        throw ContractError("gate: " + std::to_string(p_class.size()) + " class scores but " +
                            std::to_string(class_domains.size()) + " domain assignments");
    }
    double mass = 0.0;
    for (double p : p_class) {
        if (p < -1e-9 || p > 1.0 + 1e-9) {
            throw ContractError("gate: class probability " + std::to_string(p) +
                                " outside [0, 1]");
        }
        mass += p;
    }
    if (std::abs(mass - 1.0) > 1e-6) {
        throw ContractError("gate: class probabilities sum to " + std::to_string(mass));
    }
    if (p_seen < -1e-9 || p_unseen < -1e-9 || std::abs(p_seen + p_unseen - 1.0) > 1e-6) {
        throw ContractError("gate: domain probabilities are not a distribution");
    }

    std::vector<double> scores(p_class.size());
    for (std::size_t y = 0; y < p_class.size(); ++y) {
        scores[y] = p_class[y] * (class_domains[y] == DomainLabel::seen ? p_seen : p_unseen);
    }
    return scores;
}

ad::Checkpoint to_checkpoint(const DomainClassifier& dc) {
    ad::Checkpoint ckpt;
    ad::checkpoint_add_mlp(ckpt, "dc", dc.mlp);
    return ckpt;
}

DomainClassifier dc_from_checkpoint(const ad::Checkpoint& ckpt) {
    DomainClassifier dc;
    dc.mlp = ad::mlp_from_checkpoint(ckpt, "dc", ad::Activation::relu, ad::Activation::identity);
    if (dc.mlp.out_dim() != 2) {
        throw DataError("domain classifier checkpoint has " + std::to_string(dc.mlp.out_dim()) +
                        " outputs, expected 2");
    }
    return dc;
}

void save_dc(const std::filesystem::path& path, const DomainClassifier& dc) {
    ad::save_checkpoint(path, to_checkpoint(dc));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g\n", dc.temperature);
    std::ofstream os(path.string() + ".temperature");
    if (!os || !(os << buf)) {
        throw DataError("cannot write temperature sidecar for " + path.string());
    }
}

DomainClassifier load_dc(const std::filesystem::path& path) {
    DomainClassifier dc = dc_from_checkpoint(ad::load_checkpoint(path));
    const std::string sidecar = path.string() + ".temperature";
    std::ifstream is(sidecar);
    double t = 0.0;
    if (!is || !(is >> t)) {
        throw DataError("missing or unreadable temperature sidecar " + sidecar);
    }
    if (!(t > 0) || !std::isfinite(t)) {
        throw DataError("temperature sidecar " + sidecar + " holds a non-positive value");
    }
    dc.temperature = t;
    return dc;
}

} // namespace gzsl::gate
