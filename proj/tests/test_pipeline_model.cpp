#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rootdensity/errors.hpp"
#include "rootdensity/pipeline_model.hpp"
#include "support.hpp"

using namespace rootdensity;
using namespace rootdensity::pipeline;

namespace {

PipelineConfig config(unsigned n, unsigned t, Variant v, unsigned depth) {
  PipelineConfig c;
  c.degree = n;
  c.iterations = t;
  c.variant = v;
  c.pipeline_depth = depth;
  return c;
}

/// Independent count: sum over levels and passes of the transits each pass needs.
std::uint64_t counted_transits(unsigned n, unsigned t, Variant v) {
  std::uint64_t total = 0;
  for (unsigned m = n; m >= 2; --m) {
    std::uint64_t per_iter = 0;
    for (unsigned i = 1; i < m; ++i) {
      // Left step i: columns i-1..m-1. Right step i: rows 0..i.
      per_iter += v == Variant::kWide ? 2 : (m - i + 1) + (i + 1);
    }
    total += per_iter * t;
  }
  return total;
}

}  // namespace

TEST_CASE("passes_per_task closed forms") {
  CHECK(passes_per_task(6, 10, Variant::kWide) == 300);
  CHECK(passes_per_task(6, 10, Variant::kNarrow) == 1000);
  CHECK(passes_per_task(2, 1, Variant::kWide) == 2);
  for (unsigned n = 2; n <= 12; ++n) {
    for (unsigned t = 1; t <= 12; ++t) {
      for (auto v : {Variant::kWide, Variant::kNarrow}) {
        CHECK(passes_per_task(n, t, v) == counted_transits(n, t, v));
      }
    }
  }
  CHECK_THROWS_AS(passes_per_task(1, 10, Variant::kWide), ConfigError);
}

TEST_CASE("scheduler transitions") {
  const ScheduleShape shape{6, 10, Variant::kWide};
  auto s = initial_state(shape);
  CHECK(s.level == 6);
  CHECK(s.phase == Phase::kSubtractShift);
  auto tr = scheduler_next(s, shape);
  CHECK(tr.next.pass == 2);
  CHECK(tr.next.level == 6);
  CHECK(tr.next.phase == Phase::kLeftSweep);
  CHECK(tr.extracted.empty());

  TaskState end_level{0, 6, 10, 10, 1, Phase::kAddShift};
  tr = scheduler_next(end_level, shape);
  CHECK(tr.next == TaskState{0, 5, 1, 1, 1, Phase::kSubtractShift});
  CHECK(tr.extracted == std::vector<unsigned>{5});

  TaskState last{0, 2, 10, 2, 1, Phase::kAddShift};
  tr = scheduler_next(last, shape);
  CHECK(tr.next.phase == Phase::kDone);
  CHECK(tr.extracted == std::vector<unsigned>{1, 0});

  CHECK(phase_for(6, 5) == Phase::kLeftSweep);
  CHECK(phase_for(6, 6) == Phase::kRightSweep);
  CHECK(phase_for(6, 10) == Phase::kAddShift);
}

TEST_CASE("scheduler rejects illegal states") {
  const ScheduleShape shape{6, 10, Variant::kWide};
  CHECK_THROWS_AS(scheduler_next(TaskState{0, 7, 1, 1, 1, Phase::kSubtractShift}, shape), IllegalState);
  CHECK_THROWS_AS(scheduler_next(TaskState{0, 1, 1, 1, 1, Phase::kSubtractShift}, shape), IllegalState);
  CHECK_THROWS_AS(scheduler_next(TaskState{0, 6, 11, 1, 1, Phase::kSubtractShift}, shape), IllegalState);
  CHECK_THROWS_AS(scheduler_next(TaskState{0, 6, 1, 11, 1, Phase::kAddShift}, shape), IllegalState);
  CHECK_THROWS_AS(scheduler_next(TaskState{0, 6, 1, 3, 1, Phase::kRightSweep}, shape), IllegalState);
  CHECK_THROWS_AS(scheduler_next(TaskState{0, 6, 1, 3, 2, Phase::kLeftSweep}, shape), IllegalState);
  CHECK_THROWS_AS(scheduler_next(TaskState{0, 2, 1, 1, 1, Phase::kDone}, shape), IllegalState);
}

TEST_CASE("scheduler totality from every legal state") {
  for (auto v : {Variant::kWide, Variant::kNarrow}) {
    for (unsigned n = 2; n <= 7; ++n) {
      for (unsigned t = 1; t <= 4; ++t) {
        const ScheduleShape shape{n, t, v};
        const std::uint64_t k = passes_per_task(n, t, v);
        // Walk from the initial state, recording every state visited; from
        // the j-th state exactly k - j steps must remain.
        std::vector<TaskState> states;
        auto s = initial_state(shape);
        std::vector<unsigned> extracted;
        while (s.phase != Phase::kDone) {
          states.push_back(s);
          auto tr = scheduler_next(s, shape);
          extracted.insert(extracted.end(), tr.extracted.begin(), tr.extracted.end());
          s = tr.next;
        }
        CHECK(states.size() == k);
        std::vector<unsigned> expect_slots;
        for (unsigned m = n; m >= 2; --m) expect_slots.push_back(m - 1);
        expect_slots.push_back(0);
        CHECK(extracted == expect_slots);
        for (std::size_t j = 0; j < states.size(); j += 1 + states.size() / 50) {
          auto r = states[j];
          std::uint64_t steps = 0;
          while (r.phase != Phase::kDone) {
            r = scheduler_next(r, shape).next;
            ++steps;
          }
          CHECK(steps == k - j);
        }
      }
    }
  }
}

TEST_CASE("single batch takes (K+1) N_p cycles") {
  for (unsigned depth : {1u, 4u, 16u, 64u}) {
    const auto cfg = config(6, 10, Variant::kWide, depth);
    const auto rep = simulate(cfg, depth);
    CHECK(rep.total_cycles == (300 + 1) * depth);
    CHECK(rep.batch_cycles_formula == (300 + 1) * depth);
  }
}

TEST_CASE("a lone task finishes after K transits plus the FIFO write") {
  const auto cfg = config(6, 10, Variant::kWide, 16);
  const auto rep = simulate(cfg, 1);
  CHECK(rep.total_cycles == 300 * 16 + 1);
  CHECK(rep.total_cycles <= rep.batch_cycles_formula);
}

TEST_CASE("steady stream reaches C = K") {
  auto cfg = config(6, 10, Variant::kWide, 16);
  auto rep = simulate(cfg, 200);
  CHECK(rep.cycles_per_input == 300.0);
  CHECK(rep.passes_per_task == 300);
  CHECK(rep.throughput_per_s == doctest::Approx(1e8 / 300));
  cfg.variant = Variant::kNarrow;
  rep = simulate(cfg, 100);
  CHECK(rep.cycles_per_input == 1000.0);
  rep = simulate(config(2, 1, Variant::kWide, 8), 100);
  CHECK(rep.cycles_per_input == 2.0);
}

TEST_CASE("formula and simulation agree") {
  for (auto v : {Variant::kWide, Variant::kNarrow}) {
    for (unsigned n = 2; n <= 8; ++n) {
      for (unsigned t = 1; t <= 12; ++t) {
        const auto cfg = config(n, t, v, 4);
        const auto rep = simulate(cfg, 9);
        CHECK(rep.passes_per_task == passes_per_task(n, t, v));
      }
    }
  }
}

TEST_CASE("report bounds hold for streaming wide runs") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 60; ++trial) {
    const unsigned n = 2 + trial % 6, t = 1 + trial % 5, depth = 1 + trial % 9;
    const std::uint64_t tasks = 1 + rng() % 40;
    const auto cfg = config(n, t, Variant::kWide, depth);
    const auto rep = simulate(cfg, tasks);
    const std::uint64_t k = passes_per_task(n, t, Variant::kWide);
    const std::uint64_t batches = (tasks + depth - 1) / depth;
    CHECK(rep.total_cycles <= (k + 1) * depth * batches);
    CHECK(k * tasks <= rep.total_cycles * depth);
    CHECK(rep.stall_cycles == 0);
    CHECK(rep.fifo_max_occupancy <= cfg.fifo_depth);
  }
}

TEST_CASE("tasks are conserved every cycle") {
  const auto cfg = config(5, 3, Variant::kNarrow, 7);
  std::uint64_t cycles = 0;
  bool ok = true;
  std::uint64_t max_in_flight = 0;
  simulate(cfg, 50, [&](std::uint64_t, std::uint64_t fetched, std::uint64_t emitted,
                        std::uint64_t in_flight) {
    ++cycles;
    ok = ok && fetched == emitted + in_flight;
    max_in_flight = std::max(max_in_flight, in_flight);
  });
  CHECK(ok);
  CHECK(cycles > 0);
  CHECK(max_in_flight == 7);
}

TEST_CASE("shared FIFO contention across cores") {
  auto cfg = config(4, 2, Variant::kWide, 4);
  cfg.core_count = 3;
  cfg.fifo_depth = 1;
  const auto rep = simulate(cfg, 60);
  CHECK(rep.stall_cycles > 0);
  CHECK(rep.fifo_max_occupancy <= 1);
  CHECK(rep.completion_cycles.size() == 60);
  CHECK(rep.passes_per_task == passes_per_task(4, 2, Variant::kWide));

  // With a deep FIFO and ample drain a single core never stalls.
  auto single = config(6, 10, Variant::kWide, 16);
  const auto r1 = simulate(single, 100);
  CHECK(r1.stall_cycles == 0);
  CHECK(r1.fifo_max_occupancy <= single.fifo_depth);
}

TEST_CASE("throughput model") {
  auto cfg = config(6, 10, Variant::kWide, 16);
  CHECK(throughput_model(cfg) == doctest::Approx(333333.333333).epsilon(1e-12));
  auto narrow = cfg;
  narrow.variant = Variant::kNarrow;
  CHECK(throughput_model(narrow) == doctest::Approx(1e5).epsilon(1e-15));
  CHECK(throughput_model(narrow) / throughput_model(cfg) == doctest::Approx(0.3).epsilon(1e-15));
  cfg.clock_hz = 300;
  CHECK(throughput_model(cfg) == 1.0);
  cfg.core_count = 4;
  CHECK(throughput_model(cfg) == 4.0);
}

TEST_CASE("efficiency ratios") {
  CHECK(efficiency_ratio(1.0, 1.0, 1.0, 1.0) == 1.0);
  CHECK(efficiency_ratio(1.0, 1.0, 0.3, reference::kNarrowRelativePower) ==
        doctest::Approx(0.625).epsilon(1e-12));
  // The absolute core powers give a slightly different ratio.
  CHECK(efficiency_ratio(1.0, reference::kPeCorePowerW, 0.3, reference::kNarrowPeCorePowerW) ==
        doctest::Approx(0.3 * 1.43 / 0.68).epsilon(1e-12));
  CHECK(efficiency_ratio(reference::kCpuGflopsPerW, 1.0, reference::kFpgaGflopsPerW, 1.0) ==
        doctest::Approx(64.9333333).epsilon(1e-6));
  CHECK_THROWS_AS(efficiency_ratio(1, 0, 1, 1), ConfigError);
}

TEST_CASE("pass executor reproduces the solver bit for bit") {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const int t = 1 + trial % 12;
    const auto p = from_roots(rdtest::separated_roots(rng, n));
    SolveConfig cfg;
    cfg.iterations = t;
    const auto expect = solve_roots(p, cfg).roots;
    for (auto v : {Variant::kWide, Variant::kNarrow}) {
      PassExecutor<double> ex(p, t, v);
      const auto transits = ex.run();
      CHECK(ex.roots() == expect);
      if (n >= 2) CHECK(transits == passes_per_task(n, t, v));
    }
    PassExecutor<float> exf(p.cast<float>(), t, Variant::kNarrow);
    exf.run();
    CHECK(exf.roots() == solve_roots(p.cast<float>(), cfg).roots);
  }
}

TEST_CASE("report text") {
  const auto cfg = config(6, 10, Variant::kWide, 16);
  const auto text = format_report(cfg, simulate(cfg, 64));
  CHECK(text.find("\nK=300\n") != std::string::npos);
  CHECK(text.find("\nC=300\n") != std::string::npos);
  CHECK(text.find("\nC_batch=4816\n") != std::string::npos);
  CHECK(text.find("\nstall_cycles=0\n") != std::string::npos);
  CHECK(parse_variant("narrow") == Variant::kNarrow);
  CHECK_THROWS_AS(parse_variant("medium"), ConfigError);
}

TEST_CASE("config validation") {
  auto cfg = config(6, 10, Variant::kWide, 16);
  cfg.pipeline_depth = 0;
  CHECK_THROWS_AS(simulate(cfg, 1), ConfigError);
  cfg = config(1, 10, Variant::kWide, 16);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = config(6, 10, Variant::kWide, 16);
  CHECK_THROWS_AS(simulate(cfg, 0), ConfigError);
}
