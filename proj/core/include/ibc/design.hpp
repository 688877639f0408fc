#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "ibc/linearize.hpp"

namespace ibc {

/// Raised when the Riccati recursion fails to converge or the design inputs
/// are malformed.
class DesignError : public std::runtime_error {
public:
    explicit DesignError(const std::string& what) : std::runtime_error(what) {}
};

/// Quadratic weights as decade exponents: S = 10^p1 I on the integrator
/// states (p1 absent selects S = 0, the pure LQ case) and R = 10^p2 I on the
/// inputs. Q is fixed to identity on the 2n relative-density states and zero
/// on the n gamma states.
struct WeightConfig {
    std::optional<double> p1;
    double p2 = -3.0;

    bool pure_lq() const { return !p1.has_value(); }
};

/// Integrator-augmented problem matrices: state [dx; y] with
/// y(k+1) = y(k) + H dx, H = [I, -I, 0].
struct AugmentedSystem {
    Eigen::MatrixXd A;  ///< 4n x 4n
    Eigen::MatrixXd B;  ///< 4n x n
    Eigen::MatrixXd Q;  ///< 4n x 4n, blkdiag(I_2n, 0_n, S)
    Eigen::MatrixXd R;  ///< n x n
    int n = 0;
};

/// H = [I_n, -I_n, 0_n] selecting the per-section relative-density gap.
Eigen::MatrixXd density_gap_selector(int n);

AugmentedSystem augment(const LinearModel& lifted, const WeightConfig& weights);

struct RiccatiOptions {
    double value_tol = 1e-9;   ///< max-abs change of P between iterates
    double gain_tol = 1e-10;   ///< max-abs change of K, used when converging on the gain
    long max_iterations = 100000;
    bool converge_on_gain = false;  ///< for the stabilizable-only sigma = 1 regime
};

struct RiccatiSolution {
    Eigen::MatrixXd P;
    long iterations = 0;
    double residual = 0.0;  ///< last max-abs change of the monitored quantity
};

/// One backward step of the finite-horizon Riccati recursion,
///   P' = Q + A^T (P - P B (R + B^T P B)^{-1} B^T P) A,
/// symmetrized before returning.
Eigen::MatrixXd riccati_backward_step(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Iterates riccati_backward_step from P = 0 until the monitored quantity
/// (P, or the gain when converge_on_gain is set) is stationary. Throws
/// DesignError with spectral information when max_iterations is exhausted.
RiccatiSolution solve_riccati(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                              const Eigen::MatrixXd& R, const RiccatiOptions& options = {});

/// Feedback gain K = (R + B^T P B)^{-1} B^T P A, by linear solve.
Eigen::MatrixXd feedback_gain(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& R);

/// Designed regulator: the full gain over [dx; y], its partitions, and the
/// differential-form matrices, plus everything needed to reuse the design
/// without re-solving.
struct GainSet {
    Eigen::MatrixXd K;    ///< n x 4n
    Eigen::MatrixXd K1;   ///< n x 3n, acts on dx
    Eigen::MatrixXd K2;   ///< n x n, acts on y
    Eigen::MatrixXd Kp;   ///< K1 - K2 H
    Eigen::MatrixXd KI;   ///< = K2

    int n = 0;
    int lift_steps = 1;
    double sigma = 0.95;
    std::optional<double> p1;
    double p2 = 0.0;
    double eps_nominal = 0.5;
    double rel_density_nominal = 1.0;
    long riccati_iterations = 0;
    double riccati_residual = 0.0;

    /// Nominal measurement vector [rel; rel; gamma] (3n).
    Eigen::VectorXd x_nominal() const;
};

GainSet extract_gains(const RiccatiSolution& riccati, const AugmentedSystem& system, const WeightConfig& weights);

/// Full pipeline: nominal point, analytic Jacobians, control-step lifting,
/// augmentation, Riccati solve (gain-monitored when sigma = 1), extraction.
GainSet design_gains(const Scenario& scenario, double sigma, const WeightConfig& weights);

/// Text round-trip with a metadata header (sigma, p1, p2, n, lift steps,
/// residual) and full-precision matrices.
void save_gains(std::ostream& out, const GainSet& gains);
GainSet load_gains(std::istream& in);
GainSet load_gains_file(const std::string& path);

}  // namespace ibc
