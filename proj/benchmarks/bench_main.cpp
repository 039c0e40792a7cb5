#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "tickgraph/lang.hpp"
#include "tickgraph/match.hpp"
#include "tickgraph/mdp.hpp"

using namespace tickgraph;

namespace {

lang::Model model(const char* name)
{
    std::ifstream in(std::string(TICKGRAPH_MODELS_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return lang::load(ss.str());
}

void explore_model(benchmark::State& state, const char* name)
{
    const auto m = model(name);
    const auto sys = m.system();
    ExploreLimits lim;
    lim.jobs = static_cast<unsigned>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(explore(sys, lim));
}

void BM_ExplorePta(benchmark::State& state) { explore_model(state, "pta.big"); }
void BM_ExploreCloud(benchmark::State& state) { explore_model(state, "cloud.big"); }

void BM_ElaborateCloud(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(model("cloud.big"));
}

void BM_CanonicalCloudStates(benchmark::State& state)
{
    const auto m = model("cloud.big");
    const Mdp mdp = explore(m.system());
    for (auto _ : state)
        for (const auto& s : mdp.states)
            benchmark::DoNotOptimize(canonical_form(s.bigraph));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * mdp.states.size()));
}

} // namespace

BENCHMARK(BM_ExplorePta)->Arg(1);
BENCHMARK(BM_ExploreCloud)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ElaborateCloud)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CanonicalCloudStates);
