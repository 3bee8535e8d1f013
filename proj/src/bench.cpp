// Copyright 2026, The shrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shrec/bench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "shrec/errors.hpp"
#include "shrec/memory.hpp"
#include "shrec/oracle.hpp"

namespace shrec {

using nlohmann::json;

void SyntheticSpec::validate() const {
  if (alphabet_size == 0) throw ValidationError("alphabet_size must be positive");
  if (event_count == 0) throw ValidationError("event_count must be positive");
  if (event_gap <= Seconds{0}) throw ValidationError("event_gap must be positive");
  if (!noise_weights.empty()) {
    if (noise_weights.size() != alphabet_size) {
      throw ValidationError("noise_weights needs one weight per symbol");
    }
    if (std::any_of(noise_weights.begin(), noise_weights.end(),
                    [](double w) { return !(w >= 0.0) || !std::isfinite(w); })) {
      throw ValidationError("noise weights must be finite and non-negative");
    }
  }
  std::size_t cells = 0;
  for (std::size_t i = 0; i < planted.size(); ++i) {
    const auto& p = planted[i];
    if (p.symbols.empty()) throw ValidationError("planted pattern is empty");
    for (auto s : p.symbols) {
      if (s == 0 || s > alphabet_size) {
        throw ValidationError(fmt::format("planted symbol {} outside 1..{}", s, alphabet_size));
      }
    }
    if (!(p.target_support > 0.0) || p.target_support > 1.0) {
      throw ValidationError("target_support must lie in (0, 1]");
    }
    if (p.jitter_cv < 0.0) throw ValidationError("jitter_cv must be non-negative");
    const std::size_t count = planted_count(i);
    cells += count * p.symbols.size();
    if (p.period) {
      if (*p.period < p.symbols.size()) throw ValidationError("period shorter than the pattern");
      if (count > 0 && (count - 1) * *p.period + p.symbols.size() > event_count) {
        throw ValidationError("periodic plant does not fit into event_count");
      }
    }
  }
  if (cells > event_count) {
    throw ValidationError(
        fmt::format("planted occurrences need {} slots but only {} events exist", cells, event_count));
  }
  if (cells < event_count && !noise_weights.empty() &&
      std::accumulate(noise_weights.begin(), noise_weights.end(), 0.0) <= 0.0) {
    throw ValidationError("noise weights are all zero");
  }
}

std::size_t SyntheticSpec::planted_count(std::size_t index) const {
  const auto& p = planted.at(index);
  return static_cast<std::size_t>(
      std::llround(p.target_support * static_cast<double>(window_count(event_count, p.symbols.size()))));
}

namespace {

// Minimal TOML: `key = value` lines, `[[planted]]` array tables, numbers,
// strings, booleans and flat arrays.
json toml_value(std::string text) {
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  text = trim(text);
  if (text.empty()) throw FormatError("missing TOML value");
  if (text.front() == '[') {
    if (text.back() != ']') throw FormatError("unterminated TOML array: " + text);
    json arr = json::array();
    std::string inner = text.substr(1, text.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!trim(item).empty()) arr.push_back(toml_value(item));
    }
    return arr;
  }
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') throw FormatError("unterminated TOML string");
    return text.substr(1, text.size() - 2);
  }
  if (text == "true") return true;
  if (text == "false") return false;
  std::string digits;
  std::copy_if(text.begin(), text.end(), std::back_inserter(digits), [](char c) { return c != '_'; });
  try {
    std::size_t used = 0;
    if (digits.find_first_of(".eE") == std::string::npos) {
      auto v = std::stoll(digits, &used);
      if (used == digits.size()) return v;
    } else {
      auto v = std::stod(digits, &used);
      if (used == digits.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw FormatError("unsupported TOML value: " + text);
}

json parse_toml(std::string_view text) {
  static const std::regex kv(R"(^\s*([A-Za-z0-9_]+)\s*=\s*(.+?)\s*$)");
  static const std::regex table(R"(^\s*\[\[\s*([A-Za-z0-9_]+)\s*\]\]\s*$)");
  json root = json::object();
  json* current = &root;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) {
      // '#' inside a quoted string is kept
      if (std::count(line.begin(), line.begin() + static_cast<std::ptrdiff_t>(hash), '"') % 2 == 0) {
        line.erase(hash);
      }
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, table)) {
      auto& arr = root[m[1].str()];
      if (arr.is_null()) arr = json::array();
      arr.push_back(json::object());
      current = &arr.back();
    } else if (std::regex_match(line, m, kv)) {
      (*current)[m[1].str()] = toml_value(m[2].str());
    } else {
      throw FormatError("unsupported TOML line: " + line);
    }
  }
  return root;
}

}  // namespace

SyntheticSpec parse_synthetic_spec(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  json j;
  try {
    j = first != std::string_view::npos && text[first] == '{' ? json::parse(text) : parse_toml(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad synthetic spec: ") + e.what());
  }
  SyntheticSpec spec;
  try {
    spec.alphabet_size = j.at("alphabet_size").get<std::size_t>();
    spec.event_count = j.at("event_count").get<std::size_t>();
    spec.seed = j.value("seed", spec.seed);
    spec.home_id = j.value("home", spec.home_id);
    spec.event_gap = Seconds(j.value("event_gap_s", spec.event_gap.count()));
    if (j.contains("start")) {
      auto ts = parse_iso8601(j["start"].get<std::string>());
      if (!ts) throw FormatError("bad start timestamp");
      spec.start = *ts;
    }
    spec.noise_weights = j.value("noise_weights", std::vector<double>{});
    for (const auto& p : j.value("planted", json::array())) {
      PlantedSpec plant;
      plant.symbols = p.at("symbols").get<std::vector<std::uint32_t>>();
      plant.target_support = p.at("target_support").get<double>();
      if (p.contains("period") && !p["period"].is_null()) plant.period = p["period"].get<std::size_t>();
      plant.jitter_cv = p.value("jitter_cv", 0.0);
      spec.planted.push_back(std::move(plant));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_synthetic_spec(ss.str());
}

json to_json(const SyntheticSpec& spec) {
  json planted = json::array();
  for (const auto& p : spec.planted) {
    json entry{{"symbols", p.symbols}, {"target_support", p.target_support}, {"jitter_cv", p.jitter_cv}};
    entry["period"] = p.period ? json(*p.period) : json(nullptr);
    planted.push_back(entry);
  }
  return json{{"alphabet_size", spec.alphabet_size}, {"event_count", spec.event_count},
              {"seed", spec.seed},                   {"home", spec.home_id},
              {"event_gap_s", spec.event_gap.count()}, {"start", format_iso8601(spec.start)},
              {"noise_weights", spec.noise_weights},   {"planted", planted}};
}

namespace {

constexpr std::array<std::string_view, 6> kRooms{"living room", "kitchen",  "bedroom",
                                                 "bathroom",    "hallway",  "office"};

Event event_for_symbol(const SyntheticSpec& spec, std::uint32_t id, Timestamp ts) {
  Event e;
  e.timestamp = ts;
  e.home_id = spec.home_id;
  e.zone_id = fmt::format("Z{}", (id - 1) % kRooms.size());
  e.zone_name = std::string(kRooms[(id - 1) % kRooms.size()]);
  e.device_id = fmt::format("D{}", id);
  e.scene_id = id % 4 == 0 ? 0 : 10 + static_cast<std::int64_t>(id);
  e.source_id = 1;
  e.group = DeviceGroup::lighting;
  return e;
}

class Placer {
 public:
  Placer(std::size_t n, std::mt19937_64& rng) : used_(n, false), rng_(rng) {}

  bool fits(std::size_t start, std::size_t len) const {
    if (start + len > used_.size()) return false;
    for (std::size_t i = start; i < start + len; ++i) {
      if (used_[i]) return false;
    }
    return true;
  }

  void take(std::size_t start, std::size_t len) {
    for (std::size_t i = start; i < start + len; ++i) used_[i] = true;
  }

  std::optional<std::size_t> random_free(std::size_t len) {
    if (len > used_.size()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> dist(0, used_.size() - len);
    for (int attempt = 0; attempt < 64; ++attempt) {
      auto s = dist(rng_);
      if (fits(s, len)) return s;
    }
    std::vector<std::size_t> free;
    for (std::size_t s = 0; s + len <= used_.size(); ++s) {
      if (fits(s, len)) free.push_back(s);
    }
    if (free.empty()) return std::nullopt;
    return free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng_)];
  }

  const std::vector<bool>& used() const { return used_; }

 private:
  std::vector<bool> used_;
  std::mt19937_64& rng_;
};

}  // namespace

SyntheticLog generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = spec.event_count;
  std::mt19937_64 rng(spec.seed);
  Placer placer(n, rng);
  std::vector<std::uint32_t> ids(n, 0);
  std::vector<ManifestEntry> manifest(spec.planted.size());

  auto place = [&](std::size_t index, std::size_t start) {
    const auto& p = spec.planted[index];
    placer.take(start, p.symbols.size());
    std::copy(p.symbols.begin(), p.symbols.end(), ids.begin() + static_cast<std::ptrdiff_t>(start));
    manifest[index].positions.push_back(start);
  };

  for (std::size_t i = 0; i < spec.planted.size(); ++i) {
    const auto& p = spec.planted[i];
    manifest[i].period = p.period;
    manifest[i].jitter_cv = p.jitter_cv;
    for (auto s : p.symbols) manifest[i].symbols.push_back(EventSymbol{s});
  }

  for (std::size_t i = 0; i < spec.planted.size(); ++i) {
    const auto& p = spec.planted[i];
    if (!p.period) continue;
    const std::size_t count = spec.planted_count(i);
    if (count == 0) continue;
    const std::size_t len = p.symbols.size();
    const std::size_t period = *p.period;
    const std::size_t slack = n - len - (count - 1) * period;
    const std::size_t offset = std::uniform_int_distribution<std::size_t>(0, slack)(rng);
    std::normal_distribution<double> jitter(0.0, p.jitter_cv * static_cast<double>(period) / std::sqrt(2.0));
    for (std::size_t k = 0; k < count; ++k) {
      const auto base = static_cast<double>(offset + k * period);
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        double pos = std::round(base + (p.jitter_cv > 0 ? jitter(rng) : 0.0));
        pos = std::clamp(pos, 0.0, static_cast<double>(n - len));
        auto start = static_cast<std::size_t>(pos);
        if (placer.fits(start, len)) {
          place(i, start);
          placed = true;
        }
      }
      if (!placed) throw ValidationError("cannot place periodic occurrence without overlap");
    }
  }

  for (std::size_t i = 0; i < spec.planted.size(); ++i) {
    const auto& p = spec.planted[i];
    if (p.period) continue;
    const std::size_t count = spec.planted_count(i);
    for (std::size_t k = 0; k < count; ++k) {
      auto start = placer.random_free(p.symbols.size());
      if (!start) throw ValidationError("planted occurrences do not fit into the log");
      place(i, *start);
    }
  }

  std::vector<double> weights = spec.noise_weights;
  if (weights.empty()) weights.assign(spec.alphabet_size, 1.0);
  std::discrete_distribution<std::uint32_t> noise(weights.begin(), weights.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (!placer.used()[i]) ids[i] = noise(rng) + 1;
  }

  SyntheticLog out;
  out.log.home_id = spec.home_id;
  out.log.events.reserve(n);
  out.symbols.reserve(n);
  out.timestamps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Timestamp ts = spec.start + spec.event_gap * static_cast<std::int64_t>(i);
    out.symbols.push_back(EventSymbol{ids[i]});
    out.timestamps.push_back(ts);
    out.log.events.push_back(event_for_symbol(spec, ids[i], ts));
  }
  for (auto& m : manifest) std::sort(m.positions.begin(), m.positions.end());
  out.manifest = std::move(manifest);
  return out;
}

SyntheticSpec home_like_spec(std::size_t event_count, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.alphabet_size = 40;
  spec.event_count = event_count;
  spec.seed = seed;
  spec.home_id = "HOME";
  spec.noise_weights.resize(spec.alphabet_size);
  for (std::size_t i = 0; i < spec.alphabet_size; ++i) {
    spec.noise_weights[i] = 1.0 / std::pow(static_cast<double>(i + 1), 1.3);
  }
  spec.planted = {
      {{1, 2}, 0.08, std::nullopt, 0.0},
      {{3, 4, 1}, 0.03, std::nullopt, 0.0},
      {{5, 6, 7, 8}, 0.02, std::nullopt, 0.0},
      {{9, 10, 11}, 0.015, std::nullopt, 0.0},
      {{2, 12, 13, 14, 15}, 0.012, std::nullopt, 0.0},
  };
  return spec;
}

std::string_view to_string(Miner miner) {
  switch (miner) {
    case Miner::wsdd: return "wsdd";
    case Miner::prefix_growth: return "prefix_growth";
    case Miner::brute_force: return "brute_force";
  }
  return "unknown";
}

std::optional<Miner> miner_from_string(std::string_view name) {
  if (name == "wsdd") return Miner::wsdd;
  if (name == "prefix" || name == "prefix_growth") return Miner::prefix_growth;
  if (name == "brute" || name == "brute_force") return Miner::brute_force;
  return std::nullopt;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
}

namespace {

std::size_t run_miner(Miner miner, const BenchCase& c, const MiningParams& params,
                      const Deadline& deadline) {
  switch (miner) {
    case Miner::wsdd: return mine(c.symbols, c.timestamps, params, &deadline).size();
    case Miner::prefix_growth: return prefix_growth_mine(c.symbols, params, &deadline).patterns.size();
    case Miner::brute_force: return brute_force_mine(c.symbols, params, &deadline).size();
  }
  return 0;
}

}  // namespace

std::vector<BenchRow> run_benchmark(std::span<const BenchCase> cases, const BenchOptions& options) {
  std::vector<BenchRow> rows;
  for (const auto& c : cases) {
    for (const auto& params : options.params) {
      params.validate();
      for (Miner miner : options.miners) {
        BenchRow row;
        row.miner = miner;
        row.label = c.label;
        row.events = c.symbols.size();
        row.min_support = params.min_support;
        row.max_window = params.max_window;
        std::vector<double> peaks;
        const std::size_t total = options.warmup + std::max<std::size_t>(1, options.repeats);
        for (std::size_t run = 0; run < total; ++run) {
          auto deadline = Deadline::after(options.timeout);
          memory::PeakScope scope;
          auto t0 = std::chrono::steady_clock::now();
          try {
            row.patterns_found = run_miner(miner, c, params, deadline);
          } catch (const TimeoutError&) {
            row.dnf = true;
            break;
          }
          auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
          if (run < options.warmup) continue;
          row.samples_ms.push_back(elapsed.count());
          peaks.push_back(static_cast<double>(scope.peak_delta()) / memory::kMiB);
        }
        if (!row.dnf) {
          row.wall_ms = median(row.samples_ms);
          row.peak_mem_mib = median(peaks);
        }
        if (options.progress) options.progress(row);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
  out << "miner,events,min_support,max_window,wall_ms,peak_mem_mib,patterns_found\n";
  for (const auto& r : rows) {
    if (r.dnf) {
      out << fmt::format("{},{},{},{},DNF,,\n", to_string(r.miner), r.events, r.min_support,
                         r.max_window);
    } else {
      out << fmt::format("{},{},{},{},{:.3f},{:.3f},{}\n", to_string(r.miner), r.events,
                         r.min_support, r.max_window, r.wall_ms, r.peak_mem_mib, r.patterns_found);
    }
  }
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman needs equal-length samples");
  if (x.size() < 2) return 0.0;
  auto rx = ranks(x);
  auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace shrec
