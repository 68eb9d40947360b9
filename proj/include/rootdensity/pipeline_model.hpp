#pragma once

// Pass-level timing model of a pipelined QR processing element.
//
// A task (one polynomial) transits an N_p-stage pipeline once per pass. A
// QR iteration at level m takes 2m-2 passes in the wide variant (one Givens
// step per pass); the narrow variant processes a single pair of positions
// per transit. After each transit the Task Next Step Scheduler advances the
// task; unfinished tasks re-enter the pipeline ahead of fresh input, and
// finished tasks write their eigenvalues to the output FIFO in one cycle.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rootdensity/eigensolver.hpp"

namespace rootdensity::pipeline {

enum class Variant { kWide, kNarrow };

struct PipelineConfig {
  unsigned degree = 6;
  unsigned iterations = 10;
  unsigned pipeline_depth = 16;
  double clock_hz = 100e6;
  Variant variant = Variant::kWide;
  unsigned fifo_depth = 16;
  unsigned fifo_drain_per_cycle = 1;
  /// Independent PE cores sharing one FIFO write port (round-robin grant).
  unsigned core_count = 1;

  void validate() const;
};

enum class Phase {
  kSubtractShift,  // first pass of an iteration: A - sI, then left step 1
  kLeftSweep,
  kRightSweep,
  kAddShift,  // last pass of an iteration: final right step, then A + sI
  kDone,
};

const char* phase_name(Phase p);

/// Progress of one task; describes the pass about to run.
struct TaskState {
  std::uint64_t task_id = 0;
  unsigned level = 0;      // m, n down to 2
  unsigned iteration = 1;  // t, 1..T
  unsigned pass = 1;       // p, 1..2m-2
  unsigned micro = 1;      // position-pair index within a pass (narrow only)
  Phase phase = Phase::kSubtractShift;

  friend bool operator==(const TaskState&, const TaskState&) = default;
};

/// The scheduler's static parameters.
struct ScheduleShape {
  unsigned degree = 6;
  unsigned iterations = 10;
  Variant variant = Variant::kWide;
};

struct Transition {
  TaskState next;
  /// Eigenvalue slots finalized by this transition, in order (eig[m-1], and
  /// eig[0] when the task completes).
  std::vector<unsigned> extracted;
};

TaskState initial_state(const ScheduleShape& shape, std::uint64_t task_id = 0);

/// Phase implied by (level, pass) alone.
Phase phase_for(unsigned level, unsigned pass);

/// Transits needed for pass p at level m: 1 when wide; the number of
/// position pairs touched by that Givens step when narrow.
unsigned micro_passes(Variant v, unsigned level, unsigned pass);

/// Advances a task by one transit. Throws IllegalState on out-of-range
/// fields or a done task.
Transition scheduler_next(const TaskState& s, const ScheduleShape& shape);

/// Transits per task: n(n-1)T wide, T n(n^2+3n-4)/3 narrow.
std::uint64_t passes_per_task(unsigned n, unsigned t, Variant v);

struct SimReport {
  std::uint64_t tasks = 0;
  std::uint64_t total_cycles = 0;
  /// Transits per task observed in the simulation (identical for all tasks).
  std::uint64_t passes_per_task = 0;
  /// Average cycles per input: over the last full pipeline window when the
  /// stream is longer than one batch, else total_cycles / tasks.
  double cycles_per_input = 0;
  /// (K + 1) N_p for reference.
  std::uint64_t batch_cycles_formula = 0;
  double throughput_per_s = 0;
  std::uint64_t fifo_max_occupancy = 0;
  std::uint64_t stall_cycles = 0;
  std::vector<std::uint64_t> completion_cycles;
};

/// Per-cycle observation hook: (cycle, fetched, emitted, in_flight).
using CycleObserver =
    std::function<void(std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t)>;

SimReport simulate(const PipelineConfig& cfg, std::uint64_t task_count,
                   const CycleObserver& observer = {});

/// Steady-state polynomials per second: clock_hz * core_count / K.
double throughput_model(const PipelineConfig& cfg);

/// (throughput_b / throughput_a) / (power_b / power_a): energy efficiency of
/// design b relative to design a.
double efficiency_ratio(double throughput_a, double power_a, double throughput_b,
                        double power_b);

/// Text table followed by key=value lines.
std::string format_report(const PipelineConfig& cfg, const SimReport& r);

Variant parse_variant(const std::string& s);

/// Figures reported for the FPGA prototype and its CPU/GPU baselines. Used
/// only for ratio arithmetic, never as measurements.
namespace reference {
inline constexpr double kClockHz = 100e6;
inline constexpr double kPeCorePowerW = 1.43;
inline constexpr double kNarrowPeCorePowerW = 0.68;
/// The narrow core's power as quoted relative to the wide core.
inline constexpr double kNarrowRelativePower = 0.48;
inline constexpr double kTotalPowerW = 2.22;
inline constexpr double kCpuPowerW = 34.6;
inline constexpr double kGpuPowerW = 70.0;
inline constexpr double kFpgaThroughput = 3.33e5;
inline constexpr double kCpuThroughput = 1.22e5;
inline constexpr double kGpuThroughput = 5.01e7;
inline constexpr double kFpgaGflops = 13.93;
inline constexpr double kFpgaCeilingGflops = 20.40;
inline constexpr double kCpuGflops = 5.11;
inline constexpr double kGpuGflops = 2089.50;
inline constexpr double kFpgaGflopsPerW = 9.74;
inline constexpr double kCpuGflopsPerW = 0.15;
inline constexpr double kGpuGflopsPerW = 29.85;
}  // namespace reference

/// Executes the solver arithmetic one transit at a time, in the order the
/// scheduler dictates. Produces bit-identical roots to QrSolver.
template <typename T>
class PassExecutor {
 public:
  PassExecutor(const Polynomial<T>& p, unsigned iterations, Variant variant)
      : shape_{static_cast<unsigned>(p.degree()), iterations, variant},
        roots_(p.degree()) {
    const auto c = companion(p);
    a_ = CompactHessenberg<T>::from_companion(c);
    state_ = initial_state(shape_);
  }

  const TaskState& state() const noexcept { return state_; }
  bool done() const noexcept { return state_.phase == Phase::kDone; }
  const std::vector<Complex<T>>& roots() const noexcept { return roots_; }
  const CompactHessenberg<T>& matrix() const noexcept { return a_; }

  void step() {
    run_transit();
    const Transition tr = scheduler_next(state_, shape_);
    for (unsigned slot : tr.extracted) roots_[slot] = a_.at(slot, slot);
    if (tr.next.phase != Phase::kDone && tr.next.level != state_.level) {
      a_.set_active_size(tr.next.level);
    }
    state_ = tr.next;
  }

  std::uint64_t run() {
    if (shape_.degree == 1) {
      roots_[0] = a_.at(0, 0);
      return 0;
    }
    std::uint64_t transits = 0;
    while (!done()) {
      step();
      ++transits;
    }
    return transits;
  }

 private:
  void run_transit() {
    const unsigned m = state_.level;
    const unsigned p = state_.pass;
    const unsigned q = state_.micro;
    const bool narrow = shape_.variant == Variant::kNarrow;
    const unsigned width = micro_passes(shape_.variant, m, p);
    if (p == 1 && q == 1) {
      shift_ = a_.at(m - 1, m - 1);
      shift_diag(a_, shift_, ShiftSign::kSubtract);
      retained_.assign(m - 1, GivensPair<T>::identity());
    }
    if (p <= m - 1) {
      const std::size_t i = p;
      if (q == 1) {
        retained_[i - 1] = givens_coeffs(a_.at(i - 1, i - 1), a_.at(i, i - 1)).pair;
      }
      if (narrow) {
        const std::size_t col = i - 1 + (q - 1);
        apply_left_columns(a_, i, retained_[i - 1], col, col + 1);
      } else {
        apply_left(a_, i, retained_[i - 1]);
      }
    } else {
      const std::size_t i = p - (m - 1);
      if (narrow) {
        apply_right_rows(a_, i, retained_[i - 1], q - 1, q);
      } else {
        apply_right(a_, i, retained_[i - 1]);
      }
    }
    if (p == 2 * m - 2 && q == width) shift_diag(a_, shift_, ShiftSign::kAdd);
  }

  ScheduleShape shape_;
  CompactHessenberg<T> a_;
  std::vector<GivensPair<T>> retained_;
  std::vector<Complex<T>> roots_;
  Complex<T> shift_{0};
  TaskState state_;
};

}  // namespace rootdensity::pipeline
