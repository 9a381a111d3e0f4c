#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "textshape/bessel.hpp"
#include "textshape/corpus.hpp"
#include "textshape/error.hpp"
#include "textshape/io.hpp"
#include "textshape/rng.hpp"

namespace textshape {

/// Insert/delete sets of an edit pair: I = set(x) \ set(x'), the words added
/// to the prototype, and D = set(x') \ set(x), the words deleted from it.
inline std::pair<std::vector<std::string>, std::vector<std::string>> diff_sets(
    const TokenSeq& x, const TokenSeq& x_prime) {
    const auto sx = token_set(x);
    const auto sp = token_set(x_prime);
    std::vector<std::string> inserted, deleted;
    std::set_difference(sx.begin(), sx.end(), sp.begin(), sp.end(), std::back_inserter(inserted));
    std::set_difference(sp.begin(), sp.end(), sx.begin(), sx.end(), std::back_inserter(deleted));
    return {std::move(inserted), std::move(deleted)};
}

/// The add/delete embedding feature f(x, x'): the insert-set embedding sum
/// concatenated with the delete-set embedding sum (length 2d), plus its
/// clipped norm and unit direction.
struct EditFeature {
    Eigen::VectorXd f;         // length 2d
    double f_norm = 0.0;       // min(||f||, 10 - epsilon)
    Eigen::VectorXd f_dir;     // unit vector; zero (dir_defined=false) when f = 0
    bool dir_defined = false;
    std::vector<std::string> inserted;
    std::vector<std::string> deleted;
    std::size_t oov_count = 0;  // words in I or D with no embedding
};

inline EditFeature edit_feature(const TokenSeq& x, const TokenSeq& x_prime,
                                const EmbeddingTable& table, double epsilon = 0.1) {
    if (!(epsilon > 0.0 && epsilon < 10.0)) {
        throw Error(errc::config_error, "epsilon must lie in (0, 10)");
    }
    EditFeature feat;
    auto [inserted, deleted] = diff_sets(x, x_prime);
    feat.inserted = std::move(inserted);
    feat.deleted = std::move(deleted);

    const Eigen::Index d = static_cast<Eigen::Index>(table.dim());
    feat.f = Eigen::VectorXd::Zero(2 * d);
    for (const auto& w : feat.inserted) {
        if (const Eigen::VectorXd* v = table.find(w)) {
            feat.f.head(d) += *v;
        } else {
            ++feat.oov_count;
        }
    }
    for (const auto& w : feat.deleted) {
        if (const Eigen::VectorXd* v = table.find(w)) {
            feat.f.tail(d) += *v;
        } else {
            ++feat.oov_count;
        }
    }

    const double norm = feat.f.norm();
    feat.f_norm = std::min(norm, 10.0 - epsilon);
    if (norm > 0.0) {
        feat.f_dir = feat.f / norm;
        feat.dir_defined = true;
    } else {
        feat.f_dir = Eigen::VectorXd::Zero(2 * d);
        feat.dir_defined = false;
    }
    return feat;
}

/// The latent edit z = z_norm * z_dir: scalar strength in [0, 10] times a
/// unit direction.
struct EditVector {
    double z_norm = 0.0;
    Eigen::VectorXd z_dir;

    Eigen::VectorXd z() const { return z_norm * z_dir; }
};

struct VmfParams {
    Eigen::VectorXd mu;  // unit mean direction
    double kappa = 0.0;  // concentration >= 0
};

namespace detail {

/// Uniform unit vector in R^d (normalized Gaussian).
inline Eigen::VectorXd uniform_unit_vector(Eigen::Index d, Rng& rng) {
    Eigen::VectorXd v(d);
    for (;;) {
        for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.normal();
        const double n = v.norm();
        if (n > 1e-12) return v / n;
    }
}

}  // namespace detail

/// One draw from vMF(mu, kappa) by tangent-normal decomposition: Wood's
/// rejection sampler for the cosine w, a uniform tangent in the orthogonal
/// complement, then a Householder reflection taking e_1 to mu.
inline Eigen::VectorXd sample_vmf(const VmfParams& params, Rng& rng) {
    const Eigen::Index d = params.mu.size();
    if (d < 2) throw Error(errc::config_error, "vMF sampling requires dimension >= 2");
    if (!(params.kappa >= 0.0) || !std::isfinite(params.kappa)) {
        throw Error(errc::config_error, "kappa must be finite and >= 0");
    }
    if (params.kappa == 0.0) return detail::uniform_unit_vector(d, rng);

    const double kappa = params.kappa;
    const double dm1 = static_cast<double>(d) - 1.0;
    const double b = (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1)) / dm1;
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);

    double w = 0.0;
    for (;;) {
        const double z = rng.beta(0.5 * dm1, 0.5 * dm1);
        const double u = rng.uniform_pos();
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
    }

    // sample around e_1, then reflect e_1 onto mu
    Eigen::VectorXd tangent = detail::uniform_unit_vector(d - 1, rng);
    Eigen::VectorXd sample(d);
    sample(0) = w;
    sample.tail(d - 1) = std::sqrt(std::max(0.0, 1.0 - w * w)) * tangent;

    Eigen::VectorXd axis = Eigen::VectorXd::Zero(d);
    axis(0) = 1.0;
    axis -= params.mu;
    const double axis_norm = axis.norm();
    if (axis_norm > 1e-12) {
        axis /= axis_norm;
        sample -= 2.0 * axis.dot(sample) * axis;
    }
    return sample / sample.norm();
}

/// Draw from the edit prior: z_norm ~ U(0, 10), z_dir uniform on the sphere.
inline EditVector sample_prior(std::size_t dim, Rng& rng) {
    if (dim < 2) throw Error(errc::config_error, "edit prior requires dimension >= 2");
    EditVector ev;
    ev.z_norm = rng.uniform(0.0, 10.0);
    ev.z_dir = detail::uniform_unit_vector(static_cast<Eigen::Index>(dim), rng);
    return ev;
}

/// Inverse-editor draw: z_dir ~ vMF(f_dir, kappa), z_norm ~ U(f_norm,
/// f_norm + epsilon). Throws ZeroEdit when f(x, x') = 0.
inline EditVector infer_edit(const TokenSeq& x, const TokenSeq& x_prime,
                             const EmbeddingTable& table, double kappa, double epsilon,
                             Rng& rng) {
    EditFeature feat = edit_feature(x, x_prime, table, epsilon);
    if (!feat.dir_defined) {
        throw Error(errc::zero_edit, "f(x, x') is zero; edit direction undefined");
    }
    EditVector ev;
    ev.z_dir = sample_vmf(VmfParams{feat.f_dir, kappa}, rng);
    ev.z_norm = rng.uniform(feat.f_norm, feat.f_norm + epsilon);
    return ev;
}

/// How the controlled norm combines its two draws. `product_clamped`
/// multiplies a N(delta, 1) draw with a U(f_norm, f_norm + eps) draw and
/// clamps into the prior support [0, 10]; `product_resampled` redraws the
/// product until it is non-negative (then caps at 10). Resampling throws
/// NoConvergence when the acceptance region is effectively unreachable.
enum class NormRule { product_clamped, product_resampled };

/// Delta-controlled inverse-editor draw: z_dir as in infer_edit, z_norm from
/// the N(delta, 1) x U(f_norm, f_norm + epsilon) product rule.
inline EditVector infer_edit_controlled(const TokenSeq& x, const TokenSeq& x_prime,
                                        const EmbeddingTable& table, double delta, double kappa,
                                        double epsilon, Rng& rng,
                                        NormRule rule = NormRule::product_clamped) {
    EditFeature feat = edit_feature(x, x_prime, table, epsilon);
    if (!feat.dir_defined) {
        throw Error(errc::zero_edit, "f(x, x') is zero; edit direction undefined");
    }
    EditVector ev;
    ev.z_dir = sample_vmf(VmfParams{feat.f_dir, kappa}, rng);
    auto draw_product = [&] {
        return rng.normal(delta, 1.0) * rng.uniform(feat.f_norm, feat.f_norm + epsilon);
    };
    if (rule == NormRule::product_clamped) {
        ev.z_norm = std::clamp(draw_product(), 0.0, 10.0);
    } else {
        double v = draw_product();
        for (int attempt = 0; v < 0.0; ++attempt) {
            if (attempt >= 100000) {
                throw Error(errc::no_convergence, "controlled norm resampling never non-negative");
            }
            v = draw_product();
        }
        ev.z_norm = std::min(v, 10.0);
    }
    return ev;
}

/// Log density of a unit vector under vMF(mu, kappa):
/// kappa * (mu . x) + log C_d(kappa) with
/// C_d(k) = k^{d/2-1} / ((2 pi)^{d/2} I_{d/2-1}(k)).
inline double vmf_log_density(const Eigen::VectorXd& x, const VmfParams& params) {
    const int d = static_cast<int>(params.mu.size());
    if (params.kappa == 0.0) return -log_sphere_surface(d);
    const double nu = 0.5 * d - 1.0;
    const double log_c = nu * std::log(params.kappa) - (0.5 * d) * std::log(2.0 * M_PI) -
                         log_bessel_i(nu, params.kappa);
    return params.kappa * params.mu.dot(x) + log_c;
}

/// JSON form {"z_norm": ..., "z_dir": [...]} with 9-significant-digit floats.
inline std::string edit_vector_json(const EditVector& ev) {
    std::string out = "{\"z_norm\":" + format9(ev.z_norm) + ",\"z_dir\":[";
    for (Eigen::Index i = 0; i < ev.z_dir.size(); ++i) {
        if (i > 0) out += ',';
        out += format9(ev.z_dir(i));
    }
    out += "]}";
    return out;
}

/// Compact binary form: one record per vector, little-endian, the direction
/// length-prefixed: u64 dim, f64 z_norm, dim x f64 z_dir.
inline void write_edit_vector_binary(std::ostream& out, const EditVector& ev) {
    bin::write_u64(out, static_cast<std::uint64_t>(ev.z_dir.size()));
    bin::write_f64(out, ev.z_norm);
    for (Eigen::Index i = 0; i < ev.z_dir.size(); ++i) bin::write_f64(out, ev.z_dir(i));
}

inline EditVector read_edit_vector_binary(std::istream& in) {
    const std::uint64_t dim = bin::read_u64(in);
    EditVector ev;
    ev.z_norm = bin::read_f64(in);
    ev.z_dir.resize(static_cast<Eigen::Index>(dim));
    for (std::uint64_t i = 0; i < dim; ++i) ev.z_dir(static_cast<Eigen::Index>(i)) = bin::read_f64(in);
    return ev;
}

}  // namespace textshape
