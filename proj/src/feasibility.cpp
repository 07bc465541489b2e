#include "asym/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>

#include <Eigen/SVD>


namespace asym {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct Functional {
    std::vector<ComplexMatrix> parts;  // one entry per variable block, may be empty
    double rhs = 0.0;
};

std::vector<ComplexMatrix> hermitian_basis(std::size_t d) {
    std::vector<ComplexMatrix> out;
    const std::size_t real_dim = d * d;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(real_dim));
    for (std::size_t k = 0; k < real_dim; ++k) {
        e.setZero();
        e[static_cast<Eigen::Index>(k)] = 1.0;
        out.push_back(real_to_hermitian(e, d));
    }
    return out;
}

double inner(const ComplexMatrix& f, const ComplexMatrix& x) { return (f.adjoint() * x).trace().real(); }

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) / 2.0; }

void psd_clip_inplace(ComplexMatrix& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    m = es.eigenvectors() * clipped.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

// One projection scheme, stepped externally. memory == 0 is Dykstra's
// iteration; otherwise alternating projections with safeguarded Anderson
// extrapolation (a step is kept only if it lowers the residual).
class ProjectionIteration {
public:
    ProjectionIteration(const ConstraintSystem& sys, Eigen::VectorXd start, std::size_t memory)
        : sys_(sys), memory_(memory), x_(std::move(start)) {
        if (memory_ == 0) {
            p_ = Eigen::VectorXd::Zero(x_.size());
            q_ = Eigen::VectorXd::Zero(x_.size());
        } else {
            x_ = sys_.project_affine(x_);
            y_ = sys_.project_psd(x_);
            r_ = (x_ - y_).norm();
        }
    }

    const Eigen::VectorXd& point() const noexcept { return x_; }

    double step() {
        if (memory_ == 0) {
            const Eigen::VectorXd y = sys_.project_psd(x_ + q_);
            q_ += x_ - y;
            const Eigen::VectorXd x_next = sys_.project_affine(y + p_);
            p_ += y - x_next;
            x_ = x_next;
            return (x_ - y).norm();
        }
        const Eigen::VectorXd tx = sys_.project_affine(y_);
        const Eigen::VectorXd g = tx - x_;
        xs_.push_back(x_);
        gs_.push_back(g);
        if (xs_.size() > memory_ + 1) {
            xs_.pop_front();
            gs_.pop_front();
        }
        if (xs_.size() >= 2) {
            const auto m = static_cast<Eigen::Index>(xs_.size() - 1);
            Eigen::MatrixXd dg(g.size(), m), dx(g.size(), m);
            for (Eigen::Index k = 0; k < m; ++k) {
                const auto i = static_cast<std::size_t>(k);
                dg.col(k) = gs_[i + 1] - gs_[i];
                dx.col(k) = xs_[i + 1] - xs_[i];
            }
            Eigen::MatrixXd gram = dg.transpose() * dg;
            gram.diagonal().array() += 1e-10 * std::max(gram.trace(), 1e-300);
            const Eigen::VectorXd gamma = gram.ldlt().solve(dg.transpose() * g);
            const Eigen::VectorXd cand = sys_.project_affine(tx - (dx + dg) * gamma);
            Eigen::VectorXd y_cand = sys_.project_psd(cand);
            const double r_cand = (cand - y_cand).norm();
            if (std::isfinite(r_cand) && r_cand < r_) {
                x_ = cand;
                y_ = std::move(y_cand);
                r_ = r_cand;
                return r_;
            }
        }
        xs_.clear();
        gs_.clear();
        x_ = tx;
        y_ = sys_.project_psd(x_);
        r_ = (x_ - y_).norm();
        return r_;
    }

private:
    const ConstraintSystem& sys_;
    std::size_t memory_;
    Eigen::VectorXd x_, y_, p_, q_;
    double r_ = 0.0;
    std::deque<Eigen::VectorXd> xs_, gs_;
};

// Semismooth Newton on f(x) = dist(x, PSD)^2 / 2 over the affine set, with a
// Levenberg-style shift, conjugate gradients for the step and Armijo
// backtracking. Records one residual per accepted step.
template <typename Record>
bool newton_phase(const ConstraintSystem& sys, Eigen::VectorXd& x, const Tolerances& tol, Record&& record) {
    ConstraintSystem::PsdLinearization lin;
    Eigen::VectorXd y = sys.project_psd(x, lin);
    double f = 0.5 * (x - y).squaredNorm();
    for (std::size_t k = 0; k < tol.max_newton_steps; ++k) {
        const Eigen::VectorXd g = sys.project_direction(x - y);
        const double gnorm = g.norm();
        if (gnorm <= 1e-15 * std::max(1.0, std::sqrt(2.0 * f))) break;
        const double shift = std::min(1e-2, gnorm);

        auto hess = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
            const Eigen::VectorXd pv = sys.project_direction(v);
            return sys.project_direction(pv - sys.apply_psd_derivative(lin, pv)) + shift * v;
        };
        Eigen::VectorXd d = Eigen::VectorXd::Zero(g.size());
        Eigen::VectorXd res = -g;
        Eigen::VectorXd dir = res;
        double rr = res.squaredNorm();
        const double cg_tol = std::min(0.1, std::sqrt(gnorm)) * gnorm;
        for (int it = 0; it < 500 && std::sqrt(rr) > cg_tol; ++it) {
            const Eigen::VectorXd hd = hess(dir);
            const double curv = dir.dot(hd);
            if (curv <= 0.0) break;
            const double alpha = rr / curv;
            d += alpha * dir;
            res -= alpha * hd;
            const double rr_next = res.squaredNorm();
            dir = res + (rr_next / rr) * dir;
            rr = rr_next;
        }
        d = sys.project_direction(d);
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            d = -g;
            slope = -gnorm * gnorm;
        }

        double t = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 50; ++ls) {
            const Eigen::VectorXd trial = x + t * d;
            ConstraintSystem::PsdLinearization trial_lin;
            Eigen::VectorXd trial_y = sys.project_psd(trial, trial_lin);
            const double trial_f = 0.5 * (trial - trial_y).squaredNorm();
            if (trial_f <= f + 1e-4 * t * slope) {
                x = trial;
                y = std::move(trial_y);
                lin = std::move(trial_lin);
                f = trial_f;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
        if (record(std::sqrt(2.0 * f), x)) return true;
    }
    // Drift in the affine constraints from the additive updates is removed here.
    x = sys.project_affine(x);
    return false;
}

}  // namespace

const char* to_string(FeasibilityStatus s) noexcept {
    switch (s) {
        case FeasibilityStatus::Feasible: return "Feasible";
        case FeasibilityStatus::NumericallyInfeasible: return "NumericallyInfeasible";
        default: return "Undecided";
    }
}

Eigen::VectorXd hermitian_to_real(const ComplexMatrix& m) {
    const auto n = m.rows();
    Eigen::VectorXd v(n * n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i) v[k++] = m(i, i).real();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            v[k++] = kSqrt2 * m(i, j).real();
            v[k++] = kSqrt2 * m(i, j).imag();
        }
    return v;
}

ComplexMatrix real_to_hermitian(const Eigen::Ref<const Eigen::VectorXd>& v, std::size_t n_) {
    const auto n = static_cast<Eigen::Index>(n_);
    if (v.size() != n * n) throw DimensionError("real_to_hermitian: vector length is not n^2");
    ComplexMatrix m(n, n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = v[k++];
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Complex z(v[k] / kSqrt2, v[k + 1] / kSqrt2);
            k += 2;
            m(i, j) = z;
            m(j, i) = std::conj(z);
        }
    return m;
}

ComplexMatrix project_psd(const ComplexMatrix& m) {
    const double defect = hermiticity_defect(m);
    if (defect > kHermitianTol) throw ValidationError("project_psd: input is not Hermitian", defect);
    ComplexMatrix out = hermitian_part(m);
    psd_clip_inplace(out);
    return out;
}

// ---------------------------------------------------------------- ConstraintSystem

ConstraintSystem::ConstraintSystem(const FeasibilityProblem& p)
    : cov_(tensor(p.action_r, p.action_s), tensor(p.action_r, p.action_s)) {
    const std::size_t dr = p.rho_r.dim();
    const std::size_t ds = p.rho_s.dim();
    if (p.action_r.dim() != dr || p.action_s.dim() != ds) throw DimensionError("feasibility: action/state dimension mismatch");
    if (!(p.tol.feasible < p.tol.infeasible)) throw ValidationError("feasibility: feasible tolerance must be below infeasible tolerance");
    if (p.reference_slack < 0.0) throw ValidationError("feasibility: reference slack must be non-negative", p.reference_slack);
    const auto sym = is_symmetric(p.action_s, p.rho_s.matrix(), 1e-9);
    if (!sym.holds) throw ValidationError("feasibility: rho_S must be symmetric", sym.residual);

    const std::size_t d = dr * ds;
    channel_dim_ = d;
    reference_dim_ = dr;
    const bool slack = p.reference_slack > 0.0;
    const auto* coh = std::get_if<CoherenceTarget>(&p.target);
    if (coh && (coh->row >= ds || coh->col >= ds || coh->row == coh->col))
        throw ValidationError("feasibility: coherence target indices out of range");
    if (const auto* exact = std::get_if<DensityMatrix>(&p.target); exact && exact->dim() != ds)
        throw DimensionError("feasibility: target state dimension mismatch");

    // Variable layout.
    blockwise_ = cov_.is_mask();
    const auto n = static_cast<Eigen::Index>(d * d);
    std::size_t offset = 0;
    auto add_segment = [&](std::size_t size) {
        Segment seg{offset, size, {}};
        offset += size * size;
        return seg;
    };
    if (blockwise_) {
        std::vector<Eigen::Index> slot(static_cast<std::size_t>(n), -1);
        std::vector<std::vector<Eigen::Index>> groups;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (slot[static_cast<std::size_t>(r)] >= 0) continue;
            slot[static_cast<std::size_t>(r)] = static_cast<Eigen::Index>(groups.size());
            groups.push_back({r});
            for (Eigen::Index c = r + 1; c < n; ++c)
                if (cov_.factor()(r, c).real() > 0.5) {
                    slot[static_cast<std::size_t>(c)] = slot[static_cast<std::size_t>(r)];
                    groups.back().push_back(c);
                }
        }
        for (auto& g : groups) {
            Segment seg = add_segment(g.size());
            seg.indices = std::move(g);
            choi_.push_back(std::move(seg));
        }
    } else {
        Segment seg = add_segment(static_cast<std::size_t>(n));
        seg.indices.resize(static_cast<std::size_t>(n));
        std::iota(seg.indices.begin(), seg.indices.end(), Eigen::Index{0});
        choi_.push_back(std::move(seg));
    }
    if (slack) {
        up_ = add_segment(dr);
        down_ = add_segment(dr);
        budget_ = add_segment(1);
    }
    if (coh) coherence_ = add_segment(1);
    variable_dim_ = offset;

    // Constraint rows.
    const ComplexMatrix rho_in_conj = kron(p.rho_r.matrix(), p.rho_s.matrix()).conjugate();
    auto output_functional = [&](const ComplexMatrix& f) { return kron(rho_in_conj, f); };
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    auto push = [&](const ComplexMatrix& choi_part, double value) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(variable_dim_));
        if (choi_part.size() > 0) row += choi_coordinates(hermitian_part(choi_part));
        rows.push_back(std::move(row));
        rhs.push_back(value);
        return static_cast<std::size_t>(rows.size() - 1);
    };

    const ComplexMatrix id_d = identity(d);
    for (const auto& e : hermitian_basis(d)) push(kron(e, id_d), inner(e, id_d));

    const ComplexMatrix id_s = identity(ds);
    const ComplexMatrix id_r = identity(dr);
    for (const auto& g : hermitian_basis(dr)) {
        const auto r = push(output_functional(kron(g, id_s)), inner(g, p.rho_r.matrix()));
        if (slack) {
            write_block(-g, up_, rows[r]);
            write_block(g, down_, rows[r]);
        }
    }
    if (slack) {
        const auto r = push(ComplexMatrix(), 2.0 * p.reference_slack);
        write_block(id_r, up_, rows[r]);
        write_block(id_r, down_, rows[r]);
        write_block(ComplexMatrix::Identity(1, 1), budget_, rows[r]);
    }

    if (const auto* exact = std::get_if<DensityMatrix>(&p.target)) {
        for (const auto& g : hermitian_basis(ds)) push(output_functional(kron(id_r, g)), inner(g, exact->matrix()));
    } else {
        const auto i = static_cast<Eigen::Index>(coh->row);
        const auto j = static_cast<Eigen::Index>(coh->col);
        ComplexMatrix re = ComplexMatrix::Zero(static_cast<Eigen::Index>(ds), static_cast<Eigen::Index>(ds));
        re(i, j) = 0.5;
        re(j, i) = 0.5;
        ComplexMatrix im = ComplexMatrix::Zero(re.rows(), re.cols());
        im(i, j) = Complex(0.0, 0.5);
        im(j, i) = Complex(0.0, -0.5);
        const auto r = push(output_functional(kron(id_r, re)), coh->value);
        write_block(-ComplexMatrix::Identity(1, 1), coherence_, rows[r]);
        push(output_functional(kron(id_r, im)), 0.0);
    }

    if (p.product_output) {
        const ComplexMatrix rho_r_ext = kron(p.rho_r.matrix(), id_s);
        const std::size_t dims[] = {dr, ds};
        const std::size_t keep_s[] = {1};
        for (const auto& f : hermitian_basis(d)) {
            const ComplexMatrix k = hermitian_part(partial_trace(f * rho_r_ext, dims, keep_s));
            push(output_functional(f - kron(id_r, k)), 0.0);
        }
    }

    a_.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(variable_dim_));
    b_.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        a_.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
        b_[static_cast<Eigen::Index>(r)] = rhs[r];
    }

    // SVD of the tall transpose A^T = V S U^T.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = p.tol.pinv_cutoff * (sv.size() > 0 ? sv[0] : 0.0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv[rank] > cutoff) ++rank;
    singular_ = sv.head(rank);
    left_ = svd.matrixV().leftCols(rank);
    right_ = svd.matrixU().leftCols(rank);

    const Eigen::VectorXd least_squares = right_ * (singular_.cwiseInverse().asDiagonal() * (left_.transpose() * b_));
    inconsistency_ = (a_ * least_squares - b_).norm();
}

void ConstraintSystem::write_block(const ComplexMatrix& m, const Segment& seg, Eigen::VectorXd& x) const {
    if (seg.size == 0) return;
    x.segment(static_cast<Eigen::Index>(seg.offset), static_cast<Eigen::Index>(seg.size * seg.size)) = hermitian_to_real(m);
}

ComplexMatrix ConstraintSystem::read_block(const Eigen::VectorXd& x, const Segment& seg) const {
    if (seg.size == 0) return ComplexMatrix();
    return real_to_hermitian(x.segment(static_cast<Eigen::Index>(seg.offset), static_cast<Eigen::Index>(seg.size * seg.size)),
                             seg.size);
}

Eigen::VectorXd ConstraintSystem::choi_coordinates(const ComplexMatrix& f_in) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(variable_dim_));
    const ComplexMatrix f = blockwise_ ? f_in : hermitian_part(cov_.apply(f_in));
    for (const auto& seg : choi_) {
        const auto m = static_cast<Eigen::Index>(seg.size);
        ComplexMatrix sub(m, m);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = f(seg.indices[static_cast<std::size_t>(a)], seg.indices[static_cast<std::size_t>(b)]);
        write_block(sub, seg, x);
    }
    return x;
}

std::vector<std::vector<Eigen::Index>> ConstraintSystem::choi_blocks() const {
    std::vector<std::vector<Eigen::Index>> out;
    for (const auto& seg : choi_) out.push_back(seg.indices);
    return out;
}

Eigen::VectorXd ConstraintSystem::pack(const FeasibilityVariable& v) const {
    const auto n = static_cast<Eigen::Index>(channel_dim_ * channel_dim_);
    if (v.choi.rows() != n || v.choi.cols() != n) throw DimensionError("pack: Choi size mismatch");
    Eigen::VectorXd x = choi_coordinates(v.choi);
    if (up_.size > 0) {
        const auto dr = static_cast<Eigen::Index>(reference_dim_);
        const ComplexMatrix zero = ComplexMatrix::Zero(dr, dr);
        write_block(v.reference_up.size() ? v.reference_up : zero, up_, x);
        write_block(v.reference_down.size() ? v.reference_down : zero, down_, x);
        x[static_cast<Eigen::Index>(budget_.offset)] = v.budget_slack;
    }
    if (coherence_.size > 0) x[static_cast<Eigen::Index>(coherence_.offset)] = v.coherence_slack;
    return x;
}

FeasibilityVariable ConstraintSystem::unpack(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != variable_dim_) throw DimensionError("unpack: wrong length");
    FeasibilityVariable v;
    const auto n = static_cast<Eigen::Index>(channel_dim_ * channel_dim_);
    v.choi = ComplexMatrix::Zero(n, n);
    for (const auto& seg : choi_) {
        const ComplexMatrix sub = read_block(x, seg);
        for (std::size_t a = 0; a < seg.size; ++a)
            for (std::size_t b = 0; b < seg.size; ++b)
                v.choi(seg.indices[a], seg.indices[b]) = sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    if (up_.size > 0) {
        v.reference_up = read_block(x, up_);
        v.reference_down = read_block(x, down_);
        v.budget_slack = x[static_cast<Eigen::Index>(budget_.offset)];
    }
    if (coherence_.size > 0) v.coherence_slack = x[static_cast<Eigen::Index>(coherence_.offset)];
    return v;
}

Eigen::VectorXd ConstraintSystem::project_affine(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != variable_dim_) throw DimensionError("project_affine: wrong length");
    Eigen::VectorXd xc = x;
    if (!blockwise_) {
        const auto& seg = choi_.front();
        write_block(hermitian_part(cov_.apply(read_block(x, seg))), seg, xc);
    }
    const Eigen::VectorXd defect = b_ - a_ * xc;
    xc.noalias() += right_ * (singular_.cwiseInverse().asDiagonal() * (left_.transpose() * defect));
    return xc;
}

Eigen::VectorXd ConstraintSystem::project_psd(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = x;
    auto clip = [&](const Segment& seg) {
        if (seg.size == 0) return;
        if (seg.size == 1) {
            const auto k = static_cast<Eigen::Index>(seg.offset);
            out[k] = std::max(out[k], 0.0);
            return;
        }
        ComplexMatrix m = read_block(x, seg);
        psd_clip_inplace(m);
        write_block(m, seg, out);
    };
    for (const auto& seg : choi_) clip(seg);
    clip(up_);
    clip(down_);
    clip(budget_);
    clip(coherence_);
    return out;
}

Eigen::VectorXd ConstraintSystem::project_psd(const Eigen::VectorXd& x, PsdLinearization& lin) const {
    Eigen::VectorXd out = x;
    lin.blocks.clear();
    auto clip = [&](const Segment& seg) {
        if (seg.size == 0) return;
        PsdLinearization::Block blk;
        blk.offset = seg.offset;
        blk.size = seg.size;
        if (seg.size == 1) {
            const auto k = static_cast<Eigen::Index>(seg.offset);
            blk.weights = Eigen::MatrixXd::Constant(1, 1, out[k] > 0.0 ? 1.0 : 0.0);
            out[k] = std::max(out[k], 0.0);
            lin.blocks.push_back(std::move(blk));
            return;
        }
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(read_block(x, seg));
        const Eigen::VectorXd& lam = es.eigenvalues();
        const auto m = lam.size();
        blk.weights.resize(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) {
                const double pi = std::max(lam[i], 0.0);
                const double pj = std::max(lam[j], 0.0);
                if (lam[i] > 0.0 && lam[j] > 0.0)
                    blk.weights(i, j) = 1.0;
                else if (lam[i] <= 0.0 && lam[j] <= 0.0)
                    blk.weights(i, j) = 0.0;
                else
                    blk.weights(i, j) = (pi - pj) / (lam[i] - lam[j]);
            }
        const ComplexMatrix clipped =
            es.eigenvectors() * lam.cwiseMax(0.0).cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
        write_block(clipped, seg, out);
        blk.vectors = es.eigenvectors();
        lin.blocks.push_back(std::move(blk));
    };
    for (const auto& seg : choi_) clip(seg);
    clip(up_);
    clip(down_);
    clip(budget_);
    clip(coherence_);
    return out;
}

Eigen::VectorXd ConstraintSystem::apply_psd_derivative(const PsdLinearization& lin, const Eigen::VectorXd& h) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(h.size());
    for (const auto& blk : lin.blocks) {
        const auto off = static_cast<Eigen::Index>(blk.offset);
        if (blk.size == 1) {
            out[off] = blk.weights(0, 0) * h[off];
            continue;
        }
        const Segment seg{blk.offset, blk.size, {}};
        const ComplexMatrix hm = read_block(h, seg);
        const ComplexMatrix rotated = blk.vectors.adjoint() * hm * blk.vectors;
        const ComplexMatrix weighted = rotated.cwiseProduct(blk.weights.cast<Complex>());
        write_block(blk.vectors * weighted * blk.vectors.adjoint(), seg, out);
    }
    return out;
}

Eigen::VectorXd ConstraintSystem::project_direction(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = v;
    if (!blockwise_) {
        const auto& seg = choi_.front();
        write_block(hermitian_part(cov_.apply(read_block(v, seg))), seg, out);
    }
    out.noalias() -= right_ * (right_.transpose() * out);
    return out;
}

double ConstraintSystem::constraint_residual(const Eigen::VectorXd& x) const { return (a_ * x - b_).norm(); }

ConstraintSystem assemble_constraints(const FeasibilityProblem& p) { return ConstraintSystem(p); }

// ---------------------------------------------------------------- Dykstra

FeasibilityReport dykstra_feasibility(const FeasibilityProblem& p) {
    const ConstraintSystem sys(p);
    FeasibilityReport rep;
    rep.linear_residual = sys.inconsistency();
    if (rep.linear_residual > 1e-8) {
        rep.status = FeasibilityStatus::NumericallyInfeasible;
        rep.gap_estimate = rep.linear_residual;
        rep.note = "linear constraints are inconsistent";
        return rep;
    }

    const std::size_t d = sys.channel_dim();
    FeasibilityVariable start;
    if (p.initial_choi) {
        if (static_cast<std::size_t>(p.initial_choi->rows()) != d * d) throw DimensionError("feasibility: initial Choi size mismatch");
        start.choi = *p.initial_choi;
    } else {
        start.choi = identity(d * d) / static_cast<double>(d);
    }

    const auto& tol = p.tol;
    rep.residual_history.reserve(std::min<std::size_t>(tol.max_iterations, 4096));

    // Records one residual; returns true once a verdict is reached.
    auto record = [&](double r, const Eigen::VectorXd& affine_point) {
        rep.residual_history.push_back(r);
        const std::size_t it = rep.residual_history.size();
        rep.iterations = it;
        rep.gap_estimate = r;
        if (r < tol.feasible) {
            rep.status = FeasibilityStatus::Feasible;
            rep.choi_out.emplace(sys.unpack(affine_point).choi, d, d, 2.0 * tol.feasible + 1e-9);
            rep.note = "feasible point found";
            return true;
        }
        if (it > tol.stall_window && r > tol.infeasible) {
            const double past = rep.residual_history[it - 1 - tol.stall_window];
            if (std::abs(r - past) < tol.stall_relative * r) {
                rep.status = FeasibilityStatus::NumericallyInfeasible;
                rep.note = "residual stalled above the infeasibility threshold";
                return true;
            }
        }
        return false;
    };

    const std::size_t budget = tol.max_iterations;
    auto run = [&](ProjectionIteration& iter, std::size_t steps) {
        for (std::size_t k = 0; k < steps && rep.residual_history.size() < budget; ++k) {
            const double r = iter.step();
            if (record(r, iter.point())) return true;
        }
        return false;
    };

    ProjectionIteration warm(sys, sys.pack(start), tol.anderson_memory);
    if (!tol.newton) {
        if (run(warm, budget)) return rep;
    } else {
        if (run(warm, tol.warmup_iterations)) return rep;
        Eigen::VectorXd x = warm.point();
        if (newton_phase(sys, x, tol, record)) return rep;
        ProjectionIteration tail(sys, std::move(x), tol.anderson_memory);
        if (run(tail, budget)) return rep;
    }
    rep.status = FeasibilityStatus::Undecided;
    rep.note = "iteration limit reached";
    return rep;
}

// ---------------------------------------------------------------- scan

std::vector<ScanPoint> max_coherence_scan(const FeasibilityProblem& base, const std::vector<double>& slacks,
                                          const ScanOptions& options) {
    if (!std::holds_alternative<CoherenceTarget>(base.target))
        throw ValidationError("max_coherence_scan: problem target must be a coherence bound");
    std::vector<ScanPoint> out;
    for (double slack : slacks) {
        FeasibilityProblem p = base;
        p.reference_slack = slack;
        ScanPoint pt;
        pt.slack = slack;
        double lo = options.lower;
        double hi = options.upper;
        pt.best = lo;
        pt.upper = hi;
        for (std::size_t round = 0; round < options.rounds; ++round) {
            const double mid = 0.5 * (lo + hi);
            std::get<CoherenceTarget>(p.target).value = mid;
            const auto rep = dykstra_feasibility(p);
            ++pt.solves;
            if (rep.status == FeasibilityStatus::Feasible) {
                lo = mid;
                pt.best = mid;
            } else {
                if (rep.status == FeasibilityStatus::Undecided) ++pt.undecided;
                hi = mid;
                pt.upper = mid;
            }
        }
        out.push_back(pt);
    }
    return out;
}

}  // namespace asym
