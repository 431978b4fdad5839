#pragma once

#include <array>
#include <functional>
#include <vector>

namespace wedge::ode {

// Two components are all the curve machinery needs: the primary unknown and a
// running integral carried alongside it.
using State = std::array<double, 2>;
using Rhs = std::function<State(double, const State&)>;
using Scalar = std::function<double(double, const State&)>;

/// One accepted Dormand-Prince step with its quartic continuous extension.
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    std::array<State, 5> c{};

    [[nodiscard]] State eval(double t) const;
    /// Derivative of the interpolant (used by Hermite checks in tests).
    [[nodiscard]] State deriv(double t) const;
};

class DenseOutput {
public:
    void push(const DenseStep& s) { steps_.push_back(s); }
    void truncate(double t_end) { t_end_ = t_end; }

    [[nodiscard]] bool empty() const { return steps_.empty(); }
    [[nodiscard]] double t_begin() const { return steps_.empty() ? 0.0 : steps_.front().t0; }
    [[nodiscard]] double t_end() const { return t_end_; }
    [[nodiscard]] const std::vector<DenseStep>& steps() const { return steps_; }

    /// Evaluates at t clamped to [t_begin, t_end].
    [[nodiscard]] State operator()(double t) const;

private:
    std::vector<DenseStep> steps_;
    double t_end_ = 0.0;
};

struct Tolerances {
    double rtol = 1e-10;
    double atol = 1e-12;
    double event_tol = 1e-12;  ///< bisection width for event and guard roots
    long max_steps = 5'000'000;
};

enum class Stop { End, Event, Guard, StepFailure };

struct Run {
    DenseOutput dense;
    Stop reason = Stop::End;
    double t_stop = 0.0;
    State y_stop{};
    long accepted = 0;
    long rejected = 0;
};

/// Integrates y' = f(t, y) forward from t0 to t_end with an adaptive
/// Dormand-Prince 5(4) pair.
///
/// `event` fires when it goes from > 0 at a step start to <= 0 at the step end.
/// `guard` is checked the same way and flags leaving the valid region.
/// Both roots are refined on the dense interpolant; the earlier one wins.
Run integrate(const Rhs& f, double t0, const State& y0, double t_end, double h0,
              const Tolerances& tol, const Scalar* event = nullptr,
              const Scalar* guard = nullptr);

}  // namespace wedge::ode
