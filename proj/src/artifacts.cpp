#include "pathcast/artifacts.hpp"

#include <cstring>

#include "json.hpp"
#include "pathcast/csv.hpp"

namespace pathcast {

namespace {

// Little-endian primitive IO; doubles travel as their bit pattern.
struct Writer {
  std::string out;
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out += s;
  }
  void vec(const std::vector<double>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (double x : v) f64(x);
  }
};

struct Reader {
  const std::string& in;
  std::size_t pos = 0;
  explicit Reader(const std::string& s) : in(s) {}
  void need(std::size_t n) const {
    if (pos + n > in.size()) fail_validation("truncated binary artifact");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str() {
    std::uint32_t n = u32();
    need(n);
    std::string s = in.substr(pos, n);
    pos += n;
    return s;
  }
  std::vector<double> vec() {
    std::uint32_t n = u32();
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
};

constexpr std::uint32_t kStoreMagic = 0x50435331;   // "PCS1"
constexpr std::uint32_t kModelsMagic = 0x50434d31;  // "PCM1"

void write_standardization(Writer& w, const stats::Standardization& s) {
  w.f64(s.mean);
  w.f64(s.std);
}

stats::Standardization read_standardization(Reader& r) {
  stats::Standardization s;
  s.mean = r.f64();
  s.std = r.f64();
  return s;
}

}  // namespace

std::string serialize_market_store(const MarketStore& store) {
  Writer w;
  w.u32(kStoreMagic);
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(store.grids.size()));
  for (const VwapGrid& g : store.grids) {
    w.i64(g.delivery_day.days);
    w.u32(static_cast<std::uint32_t>(g.delivery_quarter));
    w.i64(g.origin);
    w.f64(g.auction_seed_price);
    w.vec(g.prices);
    w.vec(g.volumes);
  }
  w.u32(static_cast<std::uint32_t>(store.fundamentals.size()));
  for (const FundamentalSeries& s : store.fundamentals) {
    w.str(s.name);
    w.u32(static_cast<std::uint32_t>(s.granularity_min));
    w.u32(static_cast<std::uint32_t>(s.availability_delay_min));
    w.i64(s.start);
    w.vec(s.actuals);
    w.vec(s.forecasts);
  }
  return std::move(w.out);
}

MarketStore deserialize_market_store(const std::string& bytes) {
  Reader r(bytes);
  if (r.u32() != kStoreMagic || r.u32() != 1) fail_validation("not a pathcast store artifact (v1)");
  MarketStore store;
  std::uint32_t n_grids = r.u32();
  store.grids.reserve(n_grids);
  for (std::uint32_t i = 0; i < n_grids; ++i) {
    VwapGrid g;
    g.delivery_day = Date{static_cast<std::int32_t>(r.i64())};
    g.delivery_quarter = static_cast<int>(r.u32());
    g.origin = r.i64();
    g.auction_seed_price = r.f64();
    g.prices = r.vec();
    g.volumes = r.vec();
    store.grids.push_back(std::move(g));
  }
  std::uint32_t n_series = r.u32();
  for (std::uint32_t i = 0; i < n_series; ++i) {
    FundamentalSeries s;
    s.name = r.str();
    s.granularity_min = static_cast<int>(r.u32());
    s.availability_delay_min = static_cast<int>(r.u32());
    s.start = r.i64();
    s.actuals = r.vec();
    s.forecasts = r.vec();
    store.fundamentals.push_back(std::move(s));
  }
  store.sort_index();
  return store;
}

std::string serialize_path_models(const PathModels& pm) {
  Writer w;
  w.u32(kModelsMagic);
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(pm.config.horizon));
  w.u32(pm.config.mode == ForecastMode::chain ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(pm.config.lead_minutes));
  w.f64(pm.config.hyper.C);
  w.f64(pm.config.hyper.epsilon);
  w.f64(pm.config.hyper.solver_tolerance);
  w.u32(pm.converged ? 1 : 0);
  w.str(pm.fingerprint);

  w.u32(static_cast<std::uint32_t>(pm.column_stats.size()));
  for (const auto& s : pm.column_stats) write_standardization(w, s);
  write_standardization(w, pm.aux_stats);
  w.u32(static_cast<std::uint32_t>(pm.target_stats.size()));
  for (const auto& s : pm.target_stats) write_standardization(w, s);

  w.u32(static_cast<std::uint32_t>(pm.chain_stats.size()));
  for (const auto& v : pm.chain_stats) {
    w.u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& s : v) write_standardization(w, s);
  }

  w.u32(static_cast<std::uint32_t>(pm.models.size()));
  for (const SvrModel& m : pm.models) {
    w.vec(m.alpha);
    w.vec(m.alpha_star);
    w.f64(m.bias);
    w.u32(static_cast<std::uint32_t>(m.support_indices.size()));
    for (int idx : m.support_indices) w.u32(static_cast<std::uint32_t>(idx));
    w.u32(static_cast<std::uint32_t>(m.stored_features.size()));
    for (const auto& row : m.stored_features) w.vec(row);
    w.vec(m.stored_aux);
    w.f64(m.kernel.l);
    w.f64(m.kernel.g);
    w.f64(m.kernel.alpha1_laplace);
    w.f64(m.kernel.alpha2_laplace);
    w.f64(m.kernel.alpha1_gauss);
    w.f64(m.kernel.alpha2_gauss);
  }

  auto write_table = [&](const std::vector<std::vector<double>>& t) {
    w.u32(static_cast<std::uint32_t>(t.size()));
    for (const auto& row : t) w.vec(row);
  };
  write_table(pm.in_sample_std);
  write_table(pm.targets_std);

  w.u32(static_cast<std::uint32_t>(pm.row_origins.size()));
  for (const auto& o : pm.row_origins) {
    w.i64(o.day.days);
    w.u32(static_cast<std::uint32_t>(o.quarter));
    w.u32(static_cast<std::uint32_t>(o.m));
  }
  w.vec(pm.row_origin_prices);
  return std::move(w.out);
}

PathModels deserialize_path_models(const std::string& bytes) {
  Reader r(bytes);
  if (r.u32() != kModelsMagic || r.u32() != 1)
    fail_validation("not a pathcast model bundle (v1)");
  PathModels pm;
  pm.config.horizon = static_cast<int>(r.u32());
  pm.config.mode = r.u32() == 1 ? ForecastMode::chain : ForecastMode::multi_output;
  pm.config.lead_minutes = static_cast<int>(r.u32());
  pm.config.hyper.C = r.f64();
  pm.config.hyper.epsilon = r.f64();
  pm.config.hyper.solver_tolerance = r.f64();
  pm.converged = r.u32() == 1;
  pm.fingerprint = r.str();

  std::uint32_t n_cols = r.u32();
  pm.column_stats.resize(n_cols);
  for (auto& s : pm.column_stats) s = read_standardization(r);
  pm.aux_stats = read_standardization(r);
  std::uint32_t n_t = r.u32();
  pm.target_stats.resize(n_t);
  for (auto& s : pm.target_stats) s = read_standardization(r);

  std::uint32_t n_chain = r.u32();
  pm.chain_stats.resize(n_chain);
  for (auto& v : pm.chain_stats) {
    v.resize(r.u32());
    for (auto& s : v) s = read_standardization(r);
  }

  std::uint32_t n_models = r.u32();
  pm.models.resize(n_models);
  for (SvrModel& m : pm.models) {
    m.alpha = r.vec();
    m.alpha_star = r.vec();
    m.bias = r.f64();
    m.support_indices.resize(r.u32());
    for (int& idx : m.support_indices) idx = static_cast<int>(r.u32());
    m.stored_features.resize(r.u32());
    for (auto& row : m.stored_features) row = r.vec();
    m.stored_aux = r.vec();
    m.kernel.l = r.f64();
    m.kernel.g = r.f64();
    m.kernel.alpha1_laplace = r.f64();
    m.kernel.alpha2_laplace = r.f64();
    m.kernel.alpha1_gauss = r.f64();
    m.kernel.alpha2_gauss = r.f64();
  }

  auto read_table = [&](std::vector<std::vector<double>>& t) {
    t.resize(r.u32());
    for (auto& row : t) row = r.vec();
  };
  read_table(pm.in_sample_std);
  read_table(pm.targets_std);

  std::uint32_t n_rows = r.u32();
  pm.row_origins.resize(n_rows);
  for (auto& o : pm.row_origins) {
    o.day = Date{static_cast<std::int32_t>(r.i64())};
    o.quarter = static_cast<int>(r.u32());
    o.m = static_cast<int>(r.u32());
  }
  pm.row_origin_prices = r.vec();
  return pm;
}

std::string forecast_to_json(const PathForecast& pf) {
  nlohmann::json j;
  j["format"] = "pathcast-forecast";
  j["version"] = 1;
  j["delivery_day"] = format_date(pf.origin.day);
  j["delivery_quarter"] = pf.origin.quarter;
  j["origin_index"] = pf.origin.m;
  j["values"] = pf.values;
  j["model_fingerprint"] = pf.model_fingerprint;
  return j.dump(2) + "\n";
}

PathForecast forecast_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || j.value("format", "") != "pathcast-forecast")
    fail_validation("not a pathcast forecast artifact");
  PathForecast pf;
  pf.origin.day = parse_date(j.at("delivery_day").get<std::string>());
  pf.origin.quarter = j.at("delivery_quarter").get<int>();
  pf.origin.m = j.at("origin_index").get<int>();
  pf.values = j.at("values").get<std::vector<double>>();
  pf.model_fingerprint = j.value("model_fingerprint", "");
  return pf;
}

std::string ensemble_to_csv(const ScenarioEnsemble& e) {
  std::vector<std::string> header = {"provenance", "weight"};
  for (int h = 1; h <= e.horizon(); ++h) header.push_back("s" + format_int(h));
  CsvWriter w(header);
  for (int i = 0; i < e.size(); ++i) {
    std::vector<std::string> row = {e.provenance[static_cast<std::size_t>(i)],
                                    format_double(e.weights[static_cast<std::size_t>(i)])};
    for (double v : e.paths[static_cast<std::size_t>(i)]) row.push_back(format_double(v));
    w.add_row(std::move(row));
  }
  return w.str();
}

ScenarioEnsemble ensemble_from_csv(const std::string& text, EnsembleKind kind,
                                   const ForecastOrigin& origin) {
  CsvTable t = parse_csv(text, "ensemble csv");
  if (t.header.size() < 3) fail_validation("ensemble csv: too few columns");
  ScenarioEnsemble e;
  e.kind = kind;
  e.origin = origin;
  const std::size_t H = t.header.size() - 2;
  for (const auto& row : t.rows) {
    e.provenance.push_back(row[0]);
    e.weights.push_back(parse_double(row[1]));
    std::vector<double> p(H);
    for (std::size_t h = 0; h < H; ++h) p[h] = parse_double(row[2 + h]);
    e.paths.push_back(std::move(p));
  }
  e.validate();
  return e;
}

std::string band_table_csv(std::span<const double> lower, std::span<const double> median,
                           std::span<const double> upper, double scp) {
  if (lower.size() != median.size() || lower.size() != upper.size())
    fail_validation("band table: length mismatch");
  CsvWriter w({"step", "lower", "median", "upper", "scp"});
  for (std::size_t u = 0; u < lower.size(); ++u)
    w.add_row({format_int(static_cast<std::int64_t>(u + 1)), format_double(lower[u]),
               format_double(median[u]), format_double(upper[u]), format_double(scp)});
  return w.str();
}

std::string trades_to_csv(std::span<const TradeLedgerRow> rows) {
  CsvWriter w({"delivery_day", "delivery_quarter", "actions", "prices", "profit_eur"});
  for (const auto& row : rows) {
    std::string actions, prices;
    for (const Execution& e : row.outcome.executions) {
      if (!actions.empty()) {
        actions += ';';
        prices += ';';
      }
      actions += e.side;
      actions += '@';
      actions += format_int(e.step);
      prices += format_double(e.price);
    }
    w.add_row({format_date(row.day), format_int(row.quarter), actions, prices,
               format_double(row.outcome.profit)});
  }
  return w.str();
}

std::string Manifest::to_json() const {
  nlohmann::json j;
  j["format"] = "pathcast-manifest";
  j["version"] = 1;
  j["command"] = command;
  j["config_sha256"] = config_hash;
  j["seed"] = seed;
  j["inputs"] = inputs;
  j["artifacts"] = artifacts;
  return j.dump(2) + "\n";
}

void ArtifactWriter::write(const std::string& rel_path, const std::string& bytes) {
  atomic_write_file(out_dir_ / rel_path, bytes);
  manifest_.artifacts[rel_path] = sha256_hex(bytes);
}

void write_manifest(const std::filesystem::path& out_dir, const Manifest& m) {
  atomic_write_file(out_dir / "manifest" / (m.command + ".json"), m.to_json());
}

}  // namespace pathcast
