#include "cv2x/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "cv2x/engine.hpp"
#include "cv2x/output.hpp"

namespace cv2x {

std::string run_dir_name(double flow, int batchsize, std::uint64_t seed) {
  return fmt::format("f{}_b{}_s{}", flow, batchsize, seed);
}

std::vector<double> parse_number_list(const std::string& text) {
  auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<double> out;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    if (const auto dots = item.find(".."); dots != std::string_view::npos) {
      const double lo = number(item.substr(0, dots));
      const double hi = number(item.substr(dots + 2));
      if (hi < lo) throw std::invalid_argument("empty range '" + std::string(item) + "'");
      for (double v = lo; v <= hi; v += 1.0) out.push_back(v);
    } else {
      out.push_back(number(item));
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<SweepRun> sweep(const SweepSpec& spec, const std::filesystem::path& out) {
  if (spec.flows.empty() || spec.batchsizes.empty() || spec.seeds.empty()) {
    throw std::invalid_argument("sweep needs at least one flow, batchsize and seed");
  }
  std::vector<SweepRun> runs;
  for (const double flow : spec.flows) {
    for (const int b : spec.batchsizes) {
      for (const auto seed : spec.seeds) {
        SweepRun r;
        r.flow = flow;
        r.batchsize = b;
        r.seed = seed;
        r.dir = out / run_dir_name(flow, b, seed);
        runs.push_back(std::move(r));
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      SweepRun& r = runs[i];
      try {
        ScenarioConfig config = spec.base;
        config.flow_rate_vps = r.flow;
        config.batchsize = r.batchsize;
        config.rng_seed = r.seed;
        require_valid(config);
        std::filesystem::create_directories(r.dir);
        RunOptions options;
        std::ofstream trace;
        std::ofstream cbr_nodes;
        if (spec.trace) {
          trace.open(r.dir / "reception_trace.csv", std::ios::binary);
          cbr_nodes.open(r.dir / "cbr_nodes.csv", std::ios::binary);
          options.reception_trace = &trace;
          options.cbr_trace = &cbr_nodes;
        }
        Engine engine(config, options);
        const RunResult result = engine.run();
        write_run_outputs(r.dir, result);
        for (const auto& s : result.metrics.sct.records) r.sct_ms.push_back(static_cast<double>(s.sct_ms));
        for (const double v : result.metrics.cbr_samples) r.cbr.add(v);
        for (const double v : result.metrics.itt_samples) r.itt.add(v);
        r.attempts = result.metrics.attempts;
        r.per = result.metrics.per.total;
        r.ok = true;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(spec.jobs, static_cast<unsigned>(runs.size())));
  std::vector<std::thread> threads;
  for (unsigned j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return runs;
}

namespace {

struct Group {
  double flow;
  int batchsize;
  std::vector<const SweepRun*> runs;
};

std::vector<Group> group_runs(const std::vector<SweepRun>& runs) {
  std::vector<Group> groups;
  for (const auto& r : runs) {
    if (!r.ok) continue;
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.flow == r.flow && g.batchsize == r.batchsize; });
    if (it == groups.end()) {
      groups.push_back({r.flow, r.batchsize, {}});
      it = groups.end() - 1;
    }
    it->runs.push_back(&r);
  }
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    return a.flow != b.flow ? a.flow < b.flow : a.batchsize < b.batchsize;
  });
  return groups;
}

/// Pooled mean and population variance of several accumulators.
std::pair<double, double> pooled(const std::vector<const RunningStats*>& parts, std::uint64_t& count) {
  count = 0;
  double sum = 0.0;
  for (const auto* p : parts) {
    count += p->count();
    sum += p->mean() * static_cast<double>(p->count());
  }
  if (count == 0) return {0.0, 0.0};
  const double mean = sum / static_cast<double>(count);
  double m2 = 0.0;
  for (const auto* p : parts) {
    const double d = p->mean() - mean;
    m2 += static_cast<double>(p->count()) * (p->variance() + d * d);
  }
  return {mean, m2 / static_cast<double>(count)};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

void emit_plot_data(const std::vector<SweepRun>& runs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto groups = group_runs(runs);

  std::string cdf = "flow,batchsize,sct_ms,cdf\n";
  std::string cbr = "flow,batchsize,samples,mean,var\n";
  std::string itt = "flow,batchsize,samples,mean_itt_ms\n";
  std::string att = "flow,batchsize,attempts,percent\n";
  std::string per = "flow,batchsize,expected,decoded,per_percent\n";
  for (const auto& g : groups) {
    std::vector<double> sct;
    std::vector<const RunningStats*> cbr_parts;
    std::vector<const RunningStats*> itt_parts;
    std::map<int, double> attempt_counts;
    double completed = 0.0;
    PerCounter per_total;
    for (const auto* r : g.runs) {
      sct.insert(sct.end(), r->sct_ms.begin(), r->sct_ms.end());
      cbr_parts.push_back(&r->cbr);
      itt_parts.push_back(&r->itt);
      for (const auto& [a, pct] : r->attempts) attempt_counts[a] += pct / 100.0 * static_cast<double>(r->sct_ms.size());
      completed += static_cast<double>(r->sct_ms.size());
      per_total.expected += r->per.expected;
      per_total.decoded += r->per.decoded;
    }
    std::sort(sct.begin(), sct.end());
    for (std::size_t i = 0; i < sct.size(); ++i) {
      if (i + 1 < sct.size() && sct[i + 1] == sct[i]) continue;
      cdf += fmt::format("{},{},{},{}\n", g.flow, g.batchsize, sct[i],
                         static_cast<double>(i + 1) / static_cast<double>(sct.size()));
    }
    std::uint64_t n = 0;
    const auto [cbr_mean, cbr_var] = pooled(cbr_parts, n);
    cbr += fmt::format("{},{},{},{},{}\n", g.flow, g.batchsize, n, cbr_mean, cbr_var);
    const auto [itt_mean, itt_var] = pooled(itt_parts, n);
    (void)itt_var;
    itt += fmt::format("{},{},{},{}\n", g.flow, g.batchsize, n, itt_mean);
    for (const auto& [a, count] : attempt_counts) {
      att += fmt::format("{},{},{},{}\n", g.flow, g.batchsize, a, completed > 0 ? 100.0 * count / completed : 0.0);
    }
    per += fmt::format("{},{},{},{},{}\n", g.flow, g.batchsize, per_total.expected, per_total.decoded,
                       per_total.per_percent());
  }
  write_text(dir / "sct_cdf.csv", cdf);
  write_text(dir / "cbr_by_flow.csv", cbr);
  write_text(dir / "itt_by_flow.csv", itt);
  write_text(dir / "attempts_by_flow.csv", att);
  write_text(dir / "per_by_flow.csv", per);
}

}  // namespace cv2x
