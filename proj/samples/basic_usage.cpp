/* Copyright 2026 The dthawkes Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
// Simulates the reference model and compares ensemble averages with the
// theoretical limits.
#include <cmath>
#include <cstdio>
#include <vector>

#include "dthawkes.hpp"

int main() {
  using namespace dthawkes;
  const ModelParams params = make_params(0.1, ExcitationKernel::geometric(0.05, 0.5),
                                         MarkDistribution::exponential(0.3));
  const TheoreticalLimits lim = theoretical_limits(params);

  SimulationConfig sim;
  sim.horizon = 2000;
  sim.n_paths = 2000;
  sim.master_seed = 42;
  sim.workers = 0;
  const auto paths = simulate_ensemble(params, sim);

  std::vector<double> n_rate;
  std::vector<double> l_rate;
  for (const auto& p : paths) {
    n_rate.push_back(static_cast<double>(p.terminal_N) / static_cast<double>(sim.horizon));
    l_rate.push_back(p.terminal_L / static_cast<double>(sim.horizon));
  }
  const SampleStats n = describe(n_rate);
  const SampleStats l = describe(l_rate);
  std::printf("branching ratio %.6f\n", check_stability(params));
  std::printf("N_T/T  mean %.6f +- %.6f  limit %.6f\n", n.mean, n.standard_error(), lim.mu_N);
  std::printf("L_T/T  mean %.6f +- %.6f  limit %.6f\n", l.mean, l.standard_error(), lim.mu_L);
  std::printf("T var(N_T/T) %.4f  limit %.4f\n", n.variance * static_cast<double>(sim.horizon), lim.sigma2_N);
  std::printf("T var(L_T/T) %.4f  limit %.4f\n", l.variance * static_cast<double>(sim.horizon), lim.sigma2_L);
  return 0;
}
