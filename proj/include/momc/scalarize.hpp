#ifndef MOMC_SCALARIZE_HPP
#define MOMC_SCALARIZE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "momc/instance.hpp"
#include "momc/weights.hpp"

namespace momc {

/// Weighted-sum coupling J(c) together with its normalization constant
/// c0 = 1 / max_i |sum_j J_ij(c)|.
struct ScalarizedCoupling {
    Eigen::MatrixXd matrix;
    double c0 = 0;
};

inline ScalarizedCoupling scalarize(const MultiObjectiveInstance& inst, const WeightVector& c)
{
    if (c.size() != inst.k()) {
        throw std::invalid_argument("weight vector length does not match objective count");
    }
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(inst.n(), inst.n());
    for (const auto& e : inst.edges()) {
        double w = 0;
        for (int k = 0; k < inst.k(); ++k) w += c[k] * e.w[static_cast<std::size_t>(k)];
        J(e.i, e.j) = w;
        J(e.j, e.i) = w;
    }
    const double denom = J.rowwise().sum().cwiseAbs().maxCoeff();
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw std::invalid_argument("degenerate scalarized coupling: normalization undefined");
    }
    return {std::move(J), 1.0 / denom};
}

/// H_total(s; c) = sum_{i<j} J_ij(c) s_i s_j.
inline double total_hamiltonian(const ScalarizedCoupling& sc, const SpinConfiguration& s)
{
    if (s.size() != sc.matrix.rows()) {
        throw std::invalid_argument("spin configuration length does not match coupling size");
    }
    Eigen::VectorXd v(s.size());
    for (int i = 0; i < s.size(); ++i) v(i) = static_cast<double>(s[i]);
    return 0.5 * v.dot(sc.matrix * v);
}

/// L scalarized problems consolidated as a block-diagonal system of dimension
/// L*n. Blocks keep their own c0; nothing is shared between them, so a solver
/// pass over the block system is algebraically the per-block pass.
struct BlockSystem {
    std::vector<ScalarizedCoupling> blocks;
    int block_dim = 0;

    int dim() const noexcept { return static_cast<int>(blocks.size()) * block_dim; }
};

inline BlockSystem build_block_system(const MultiObjectiveInstance& inst,
                                      const std::vector<WeightVector>& weights)
{
    if (weights.empty()) throw std::invalid_argument("block system needs at least one weight vector");
    BlockSystem sys;
    sys.block_dim = inst.n();
    sys.blocks.reserve(weights.size());
    for (const auto& w : weights) sys.blocks.push_back(scalarize(inst, w));
    return sys;
}

} // namespace momc

#endif
