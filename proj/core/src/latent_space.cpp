#include "gzsl/latent_space.hpp"

#include <cstddef>
#include <vector>

#include "gzsl/error.hpp"

namespace gzsl {

namespace {

ad::Tensor repeat_rows(const ad::Tensor& t, std::size_t times) {
    if (t.rank() != 2) {
        throw ShapeError("repeat_rows: expected a matrix, got " + ad::shape_str(t.shape()));
    }
    if (times == 0) {
        throw ContractError("repeat_rows: zero repetitions");
    }
    const std::size_t rows = t.dim(0), cols = t.dim(1);
    std::vector<double> out(rows * times * cols);
    auto src = t.data();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = 0; k < times; ++k) {
            std::copy(src.begin() + static_cast<std::ptrdiff_t>(r * cols),
                      src.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols),
                      out.begin() + static_cast<std::ptrdiff_t>((r * times + k) * cols));
        }
    }
    return ad::Tensor::from_data({rows * times, cols}, std::move(out));
}

} // namespace

LatentSpace latent_space_of(const cada::CadaModel& m) {
    LatentSpace space;
    space.latent_dim = m.latent_dim();
    space.embed_visual = [m](const ad::Tensor& v) {
        return cada::latent_means(m, cada::Modality::visual, v);
    };
    space.sample_visual = [m](const ad::Tensor& v, std::size_t n, Rng& rng) {
        return cada::sample_latents(m, cada::Modality::visual, v, n, rng);
    };
    space.sample_semantic = [m](const ad::Tensor& a, std::size_t n, Rng& rng) {
        return cada::sample_latents(m, cada::Modality::semantic, a, n, rng);
    };
    return space;
}

LatentSpace latent_space_of(const cycle::CycleModel& m) {
    LatentSpace space;
    space.latent_dim = m.visual_dim();
    space.embed_visual = [](const ad::Tensor& v) {
        return ad::Tensor::from_data(v.shape(), std::vector<double>(v.data().begin(), v.data().end()));
    };
    // Real features are already points of the classification space; repeated
    // draws just repeat the row.
    space.sample_visual = [](const ad::Tensor& v, std::size_t n, Rng&) {
        return repeat_rows(v, n);
    };
    space.sample_semantic = [m](const ad::Tensor& a, std::size_t n, Rng& rng) {
        ad::Tensor conditions = repeat_rows(a, n);
        ad::Tensor fake = cycle::generate(m, conditions, rng);
        return ad::Tensor::from_data(fake.shape(),
                                     std::vector<double>(fake.data().begin(), fake.data().end()));
    };
    return space;
}

} // namespace gzsl
