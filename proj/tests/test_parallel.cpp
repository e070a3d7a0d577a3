#include <omp.h>

#include <sstream>

#include "doctest.h"
#include "lace/ingest.hpp"
#include "lace/model_io.hpp"
#include "lace/parallel.hpp"
#include "lace/predict.hpp"
#include "lace/reference.hpp"
#include "lace/synth.hpp"

using namespace lace;

namespace {

std::string corpus_text(const std::vector<Trajectory>& t) {
  std::ostringstream out;
  write_trajectories_csv(out, t);
  return out.str();
}

std::string rollouts_text(const std::vector<std::vector<RolloutResult>>& all) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& task : all)
    for (const auto& r : task) {
      out << r.sample_index << ' ' << r.log_probability << ' ' << r.fallback_steps << '\n';
      for (const auto& s : r.trajectory.states) out << s.x << ' ' << s.y << ' ' << s.omega << '\n';
    }
  return out.str();
}

}  // namespace

TEST_CASE("pipeline output does not depend on the thread count") {
  auto sc = builtin_scenario("mixed-50");
  sc.agents = 150;
  TrainParams tp;
  tp.k = 60;
  PredictParams pp;

  omp_set_num_threads(1);
  const auto corpus = generate(sc, 1.0);
  const std::string corpus_ref = corpus_text(corpus);
  const auto ref_model = reference::train(corpus, tp);
  const std::string model_ref = dump_model(ref_model);
  const auto tasks = make_tasks(corpus, 3, 20);
  const std::string pred_ref = rollouts_text(reference::predict_batch(ref_model, tasks, pp));

  for (int threads : {1, 2, 3, 4, 8}) {
    CAPTURE(threads);
    omp_set_num_threads(threads);
    CHECK(corpus_text(generate(sc, 1.0)) == corpus_ref);
    const auto model = train(corpus, tp);
    CHECK(dump_model(model) == model_ref);
    CHECK(rollouts_text(predict_lace_batch(model, tasks, pp)) == pred_ref);
  }
}

TEST_CASE("parallel_for rethrows") {
  omp_set_num_threads(4);
  CHECK_THROWS_AS(parallel_for(100,
                               [](std::ptrdiff_t i) {
                                 if (i == 37) throw std::runtime_error("x");
                               }),
                  std::runtime_error);
  std::vector<int> v(1000, 0);
  parallel_for(1000, [&](std::ptrdiff_t i) { v[i] = static_cast<int>(i); });
  for (int i = 0; i < 1000; ++i) CHECK(v[i] == i);
}
