#include "rootdensity/pipeline_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>

#include "rootdensity/errors.hpp"

namespace rootdensity::pipeline {

void PipelineConfig::validate() const {
  if (degree < 2) throw ConfigError("pipeline model requires degree >= 2");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (pipeline_depth < 1) throw ConfigError("pipeline depth must be >= 1");
  if (!(clock_hz > 0) || !std::isfinite(clock_hz)) throw ConfigError("clock_hz must be > 0");
  if (fifo_depth < 1) throw ConfigError("fifo depth must be >= 1");
  if (fifo_drain_per_cycle < 1) throw ConfigError("fifo drain rate must be >= 1");
  if (core_count < 1) throw ConfigError("core count must be >= 1");
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kSubtractShift: return "subtract-shift";
    case Phase::kLeftSweep: return "left-sweep";
    case Phase::kRightSweep: return "right-sweep";
    case Phase::kAddShift: return "add-shift";
    case Phase::kDone: return "done";
  }
  return "?";
}

TaskState initial_state(const ScheduleShape& shape, std::uint64_t task_id) {
  TaskState s;
  s.task_id = task_id;
  s.level = shape.degree;
  s.phase = shape.degree >= 2 ? Phase::kSubtractShift : Phase::kDone;
  return s;
}

Phase phase_for(unsigned level, unsigned pass) {
  if (pass == 1) return Phase::kSubtractShift;
  if (pass == 2 * level - 2) return Phase::kAddShift;
  if (pass <= level - 1) return Phase::kLeftSweep;
  return Phase::kRightSweep;
}

unsigned micro_passes(Variant v, unsigned level, unsigned pass) {
  if (v == Variant::kWide) return 1;
  // Left step i covers columns i-1..m-1; right step i covers rows 0..i.
  if (pass <= level - 1) return level - pass + 1;
  return pass - (level - 1) + 1;
}

Transition scheduler_next(const TaskState& s, const ScheduleShape& shape) {
  if (s.phase == Phase::kDone) throw IllegalState("scheduler_next called on a finished task");
  const unsigned m = s.level;
  if (m < 2 || m > shape.degree) throw IllegalState("level out of range");
  if (s.iteration < 1 || s.iteration > shape.iterations) throw IllegalState("iteration out of range");
  if (s.pass < 1 || s.pass > 2 * m - 2) throw IllegalState("pass out of range");
  const unsigned width = micro_passes(shape.variant, m, s.pass);
  if (s.micro < 1 || s.micro > width) throw IllegalState("micro-pass index out of range");
  if (s.phase != phase_for(m, s.pass)) throw IllegalState("phase inconsistent with pass");

  Transition tr;
  TaskState& n = tr.next;
  n = s;
  if (s.micro < width) {
    n.micro = s.micro + 1;
    return tr;
  }
  n.micro = 1;
  if (s.pass < 2 * m - 2) {
    n.pass = s.pass + 1;
  } else if (s.iteration < shape.iterations) {
    n.iteration = s.iteration + 1;
    n.pass = 1;
  } else {
    tr.extracted.push_back(m - 1);
    if (m == 2) {
      tr.extracted.push_back(0);
      n.phase = Phase::kDone;
      return tr;
    }
    n.level = m - 1;
    n.iteration = 1;
    n.pass = 1;
  }
  n.phase = phase_for(n.level, n.pass);
  return tr;
}

std::uint64_t passes_per_task(unsigned n, unsigned t, Variant v) {
  if (n < 2 || t < 1) throw ConfigError("passes_per_task requires n >= 2 and T >= 1");
  const std::uint64_t nn = n, tt = t;
  if (v == Variant::kWide) return nn * (nn - 1) * tt;
  return tt * nn * (nn * nn + 3 * nn - 4) / 3;
}

namespace {

struct Slot {
  std::uint64_t task = 0;
  TaskState state;
  std::uint64_t transits = 0;
};

struct Core {
  // ring[tick % depth] holds the task that entered stage 0 at that tick.
  std::vector<std::optional<Slot>> ring;
  std::uint64_t tick = 0;
};

}  // namespace

SimReport simulate(const PipelineConfig& cfg, std::uint64_t task_count,
                   const CycleObserver& observer) {
  cfg.validate();
  if (task_count < 1) throw ConfigError("task_count must be >= 1");
  const ScheduleShape shape{cfg.degree, cfg.iterations, cfg.variant};
  const std::uint64_t k_formula = passes_per_task(cfg.degree, cfg.iterations, cfg.variant);
  const unsigned depth = cfg.pipeline_depth;

  std::vector<Core> cores(cfg.core_count);
  for (auto& c : cores) c.ring.resize(depth);

  SimReport rep;
  rep.tasks = task_count;
  rep.batch_cycles_formula = (k_formula + 1) * depth;
  rep.completion_cycles.reserve(task_count);

  std::uint64_t fetched = 0, emitted = 0, in_flight = 0;
  std::uint64_t fifo = 0;
  std::uint64_t observed_min = UINT64_MAX, observed_max = 0;
  unsigned grant_start = 0;

  for (std::uint64_t cycle = 0; emitted < task_count; ++cycle) {
    fifo -= std::min<std::uint64_t>(fifo, cfg.fifo_drain_per_cycle);
    bool bus_used = false;
    bool any_stall = false;

    for (unsigned ci = 0; ci < cfg.core_count; ++ci) {
      // Round-robin order for the shared FIFO write port.
      Core& core = cores[(grant_start + ci) % cfg.core_count];
      auto& slot = core.ring[core.tick % depth];

      if (slot) {
        const bool finishing = [&] {
          const Transition tr = scheduler_next(slot->state, shape);
          return tr.next.phase == Phase::kDone;
        }();
        if (finishing) {
          if (bus_used || fifo >= cfg.fifo_depth) {
            any_stall = true;
            continue;  // pipeline frozen this cycle
          }
          bus_used = true;
          ++fifo;
          rep.fifo_max_occupancy = std::max(rep.fifo_max_occupancy, fifo);
          observed_min = std::min(observed_min, slot->transits + 1);
          observed_max = std::max(observed_max, slot->transits + 1);
          rep.completion_cycles.push_back(cycle);
          ++emitted;
          --in_flight;
          slot.reset();
        } else {
          slot->state = scheduler_next(slot->state, shape).next;
          ++slot->transits;
        }
      }
      // Input selector: a returning task keeps stage 0; otherwise fetch.
      if (!slot && fetched < task_count) {
        Slot fresh;
        fresh.task = fetched;
        fresh.state = initial_state(shape, fetched);
        slot = fresh;
        ++fetched;
        ++in_flight;
      }
      ++core.tick;
    }
    if (any_stall) ++rep.stall_cycles;
    grant_start = (grant_start + 1) % cfg.core_count;
    if (observer) observer(cycle, fetched, emitted, in_flight);
    rep.total_cycles = cycle + 1;
  }

  if (observed_min != observed_max) throw IllegalState("tasks completed with unequal pass counts");
  rep.passes_per_task = observed_max;

  const std::uint64_t window = static_cast<std::uint64_t>(depth) * cfg.core_count;
  if (task_count > window) {
    const auto& t = rep.completion_cycles;
    rep.cycles_per_input =
        static_cast<double>(t[task_count - 1] - t[task_count - 1 - window]) / window;
  } else {
    rep.cycles_per_input = static_cast<double>(rep.total_cycles) / task_count;
  }
  rep.throughput_per_s = cfg.clock_hz / rep.cycles_per_input;
  return rep;
}

double throughput_model(const PipelineConfig& cfg) {
  cfg.validate();
  return cfg.clock_hz * cfg.core_count /
         static_cast<double>(passes_per_task(cfg.degree, cfg.iterations, cfg.variant));
}

double efficiency_ratio(double throughput_a, double power_a, double throughput_b,
                        double power_b) {
  if (!(power_a > 0) || !(power_b > 0)) throw ConfigError("powers must be > 0");
  if (!(throughput_a > 0)) throw ConfigError("reference throughput must be > 0");
  return (throughput_b / throughput_a) / (power_b / power_a);
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_report(const PipelineConfig& cfg, const SimReport& r) {
  std::ostringstream os;
  os << "pipeline model: n=" << cfg.degree << " T=" << cfg.iterations
     << " variant=" << (cfg.variant == Variant::kWide ? "wide" : "narrow")
     << " N_p=" << cfg.pipeline_depth << " cores=" << cfg.core_count
     << " clock_hz=" << fmt_double(cfg.clock_hz) << "\n";
  os << "  tasks               " << r.tasks << "\n"
     << "  total cycles        " << r.total_cycles << "\n"
     << "  passes per task K   " << r.passes_per_task << "\n"
     << "  cycles per input C  " << fmt_double(r.cycles_per_input) << "\n"
     << "  (K+1)*N_p           " << r.batch_cycles_formula << "\n"
     << "  throughput /s       " << fmt_double(r.throughput_per_s) << "\n"
     << "  fifo max occupancy  " << r.fifo_max_occupancy << "\n"
     << "  stall cycles        " << r.stall_cycles << "\n";
  os << "total_cycles=" << r.total_cycles << "\n"
     << "K=" << r.passes_per_task << "\n"
     << "C=" << fmt_double(r.cycles_per_input) << "\n"
     << "C_batch=" << r.batch_cycles_formula << "\n"
     << "throughput_per_s=" << fmt_double(r.throughput_per_s) << "\n"
     << "fifo_max_occupancy=" << r.fifo_max_occupancy << "\n"
     << "stall_cycles=" << r.stall_cycles << "\n";
  return os.str();
}

Variant parse_variant(const std::string& s) {
  if (s == "wide") return Variant::kWide;
  if (s == "narrow") return Variant::kNarrow;
  throw ConfigError("unknown variant '" + s + "' (expected wide or narrow)");
}

}  // namespace rootdensity::pipeline
