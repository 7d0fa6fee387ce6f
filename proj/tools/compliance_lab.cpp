// compliance-lab: experiment runner for the slot-based execution simulator
// and the compliance/reachability analysis toolkit.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clab/io.hpp"

namespace fs = std::filesystem;
using namespace clab;

namespace {

struct GlobalOpts {
  std::string out = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int runs = 0;
  bool quiet = false;
};

void apply_overrides(ExperimentConfig& cfg, const GlobalOpts& g) {
  if (g.seed_set) cfg.seed = g.seed;
  if (g.runs > 0) cfg.runs = g.runs;
}

void say(const GlobalOpts& g, const std::string& msg) {
  if (!g.quiet) std::cout << msg << "\n";
}

// days-from-civil (proleptic Gregorian), for the +5-day price lookups
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  long era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
  z += 719468;
  long era = (z >= 0 ? z : z - 146096) / 146097;
  unsigned doe = static_cast<unsigned>(z - era * 146097);
  unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  long yy = static_cast<long>(yoe) + era * 400;
  unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

std::string date_plus_days(const std::string& date, int days) {
  int y, m, d;
  if (std::sscanf(date.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
    throw ConfigError("date '" + date + "': expected YYYY-MM-DD");
  long z = days_from_civil(y, m, d) + days;
  civil_from_days(z, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        row.push_back(field);
        field.clear();
      } else {
        field += c;
      }
    }
    row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

int col_of(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw ConfigError("CSV: missing column '" + name + "'");
}

// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& config_path, const GlobalOpts& g) {
  Json cj = load_json_file(config_path);
  ExperimentConfig cfg = parse_experiment(cj);
  apply_overrides(cfg, g);
  Json env = report_envelope(cj, cfg.seed);

  StrategyProfile honest(static_cast<std::size_t>(cfg.exec.n()),
                         StrategyDescriptor::honest());
  std::vector<StrategyProfile> profiles{honest};
  for (int p = 0; p < cfg.exec.n(); ++p)
    for (const auto& cand : cfg.candidates) {
      if (cand.kind == StrategyKind::Honest) continue;
      StrategyProfile prof = honest;
      prof[static_cast<std::size_t>(p)] = cand;
      profiles.push_back(prof);
    }

  Json results = Json::array();
  std::string csv =
      "profile,party,strategy,reward_mean,reward_ci,cost_mean,utility,"
      "utility_ci,samples\r\n";
  for (const auto& prof : profiles) {
    UtilityReport rep = estimate_utility(cfg, prof, cfg.utility, cfg.runs,
                                         profile_seed(cfg.seed, prof));
    Json row = utility_report_json(rep, prof);
    row["profile"] = profile_label(prof);
    results.push_back(row);
    csv += utility_report_csv(profile_label(prof), rep, prof);
  }
  Json out = env;
  out["command"] = "simulate";
  out["results"] = results;
  fs::create_directories(g.out);
  write_file((fs::path(g.out) / "report.json").string(), out.dump(2) + "\n");
  write_file((fs::path(g.out) / "utilities.csv").string(), csv);
  say(g, "simulate: " + std::to_string(profiles.size()) + " profiles -> " + g.out);
  return 0;
}

int cmd_cone(const std::string& config_path, const GlobalOpts& g) {
  Json cj = load_json_file(config_path);
  ExperimentConfig cfg = parse_experiment(cj);
  apply_overrides(cfg, g);
  Json env = report_envelope(cj, cfg.seed);

  ConeResult cone = explore_cone(cfg, cfg.candidates, cfg.epsilon, cfg.utility,
                                 cfg.runs, cfg.max_depth);
  Json entries = Json::array();
  for (const auto& e : cone.entries) {
    Json flags = Json::array();
    for (const auto& [p, k] : e.infractions)
      flags.push_back(Json{{"party", p}, {"kind", infraction_name(k)}});
    entries.push_back(Json{{"profile", profile_label(e.profile)},
                           {"utilities", e.utilities},
                           {"path", e.path},
                           {"infractions", flags}});
  }
  Json nc = Json::array();
  for (const auto& [prof, what] : cone.non_compliant_found)
    nc.push_back(Json{{"profile", prof}, {"infraction", what}});
  Json out = env;
  out["command"] = "cone";
  out["epsilon"] = cfg.epsilon;
  out["verdict"] = cone.compliant_on_candidates ? "compliant_on_candidates"
                                                : "non_compliant";
  out["depth_exceeded"] = cone.depth_exceeded;
  out["profiles"] = entries;
  out["non_compliant_found"] = nc;
  fs::create_directories(g.out);
  write_file((fs::path(g.out) / "cone.json").string(), out.dump(2) + "\n");
  say(g, "cone: " + std::to_string(cone.entries.size()) + " profiles, verdict " +
             std::string(out["verdict"]));
  if (cone.depth_exceeded)
    throw PartialResult("cone: depth budget exhausted, partial result written");
  return 0;
}

int cmd_bounds(const std::string& params_path, const GlobalOpts& g) {
  Json pj = load_json_file(params_path);
  Json env = report_envelope(pj, g.seed_set ? g.seed : 0);
  Json rows = Json::array();
  std::string csv = "bound,params,value,extra\r\n";
  auto add = [&](const std::string& name, const Json& params, double value,
                 const Json& extra) {
    rows.push_back(Json{{"bound", name}, {"params", params}, {"value", value},
                        {"extra", extra}});
    csv += csv_escape(name) + "," + csv_escape(params.dump()) + "," +
           fmt_num(value) + "," + csv_escape(extra.dump()) + "\r\n";
  };

  if (pj.contains("delta_table"))
    for (double mu : pj.at("delta_table").get<std::vector<double>>())
      add("delta_mu", Json{{"mu", mu}}, delta_mu(mu), Json::object());
  if (pj.contains("abstain_reward"))
    for (const Json& e : pj.at("abstain_reward"))
      add("abstain_reward", e,
          bound_abstain_reward(e.at("alpha").get<double>(),
                               e.at("xi_mu").get<std::vector<double>>(),
                               e.at("R").get<double>()),
          Json::object());
  if (pj.contains("abstain_profit"))
    for (const Json& e : pj.at("abstain_profit")) {
      auto b = bound_abstain_profit(e.at("C").get<std::vector<double>>(),
                                    e.at("beta").get<std::vector<double>>(),
                                    e.at("alpha").get<double>(),
                                    e.at("xi_mu").get<std::vector<double>>(),
                                    e.at("R").get<double>());
      add("abstain_profit", e, b.eps_max,
          Json{{"argmax_party", b.argmax_party},
               {"precondition_ok", b.precondition_ok}});
    }
  if (pj.contains("pow_gap"))
    for (const Json& e : pj.at("pow_gap")) {
      auto b = bound_pow_gap(e.at("N").get<int>(), e.at("R").get<double>(),
                             e.at("q").get<int>(), e.at("delta").get<double>());
      add("pow_gap", e, b.eps, Json{{"small_delta_ok", b.small_delta_ok}});
    }
  if (pj.contains("conflict_lossy"))
    for (const Json& e : pj.at("conflict_lossy")) {
      auto b = bound_conflict_lossy(e.at("d").get<double>(), e.at("R").get<double>(),
                                    e.at("C").get<double>(), e.at("s_P").get<double>());
      add("conflict_lossy", e, b.eps_reward,
          Json{{"t_star", b.t_star},
               {"eps_profit", b.eps_profit},
               {"margin_ratio", b.margin_ratio},
               {"margin_ok", b.margin_ok}});
    }
  if (pj.contains("conflict_race"))
    for (const Json& e : pj.at("conflict_race")) {
      auto b = bound_conflict_race(e.at("p_l").get<double>(), e.at("R").get<double>(),
                                   e.at("C").get<double>(), e.at("s_P").get<double>());
      add("conflict_race", e, b.eps_reward,
          Json{{"t_star", b.t_star}, {"eps_profit", b.eps_profit}});
    }
  if (pj.contains("selfish"))
    for (const Json& e : pj.at("selfish"))
      add("selfish_relative", e,
          bound_selfish_relative(e.at("mu").get<double>(), e.at("R").get<double>(),
                                 e.at("C").get<double>()),
          Json::object());
  if (pj.contains("penalty"))
    for (const Json& e : pj.at("penalty")) {
      auto b = bound_externality_penalty(e.at("rho").get<double>(),
                                         e.at("x").get<double>(),
                                         e.at("b").get<std::vector<double>>());
      add("externality_penalty", e, b.eps_max,
          Json{{"deposit_needed", b.deposit_needed}});
    }
  if (pj.contains("confirmation_window"))
    for (const Json& e : pj.at("confirmation_window")) {
      try {
        int k = confirmation_window(e.at("v").get<double>(), e.at("x").get<double>(),
                                    e.at("d").get<double>(), e.at("R").get<double>());
        add("confirmation_window", e, k, Json::object());
      } catch (const DomainError& ex) {
        add("confirmation_window", e, 0.0, Json{{"error", ex.what()}});
      }
    }

  Json out = env;
  out["command"] = "bounds";
  out["rows"] = rows;
  fs::create_directories(g.out);
  write_file((fs::path(g.out) / "bounds.json").string(), out.dump(2) + "\n");
  write_file((fs::path(g.out) / "bounds.csv").string(), csv);
  say(g, "bounds: " + std::to_string(rows.size()) + " rows -> " + g.out);
  return 0;
}

int cmd_attacks(const std::string& prices_path, const std::string& attacks_path,
                const GlobalOpts& g) {
  auto prices = read_csv(prices_path);
  auto attacks = read_csv(attacks_path);
  if (prices.empty()) throw ConfigError("prices CSV: empty file");
  if (attacks.empty()) throw ConfigError("attacks CSV: empty file");
  int pc_date = col_of(prices[0], "date"), pc_asset = col_of(prices[0], "asset"),
      pc_price = col_of(prices[0], "price");
  int ac_asset = col_of(attacks[0], "asset"), ac_date = col_of(attacks[0], "date"),
      ac_blocks = col_of(attacks[0], "blocks"),
      ac_reward = col_of(attacks[0], "block_reward"),
      ac_ext = col_of(attacks[0], "external_utility");

  auto price_at = [&](const std::string& asset, const std::string& date) {
    for (std::size_t i = 1; i < prices.size(); ++i)
      if (prices[i][static_cast<std::size_t>(pc_asset)] == asset &&
          prices[i][static_cast<std::size_t>(pc_date)] == date)
        return std::stod(prices[i][static_cast<std::size_t>(pc_price)]);
    throw ConfigError("prices CSV: no price for " + asset + " on " + date);
  };

  Json rows = Json::array();
  std::string csv =
      "asset,date,blocks,block_reward,rewards_usd,reward_difference,"
      "actual_minus_counterfactual,external_utility\r\n";
  for (std::size_t i = 1; i < attacks.size(); ++i) {
    const auto& a = attacks[i];
    std::string asset = a[static_cast<std::size_t>(ac_asset)];
    std::string date = a[static_cast<std::size_t>(ac_date)];
    double blocks = std::stod(a[static_cast<std::size_t>(ac_blocks)]);
    double reward = std::stod(a[static_cast<std::size_t>(ac_reward)]);
    double ext = std::stod(a[static_cast<std::size_t>(ac_ext)]);
    std::string after = date_plus_days(date, 5);
    double p_after = price_at(asset, after);
    double btc0 = price_at("BTC", date);
    double btc5 = price_at("BTC", after);
    double p_btc = btc5 / btc0 - 1.0;
    double p_at = -1.0;
    try {
      p_at = price_at(asset, date);
    } catch (const ConfigError&) {
    }
    AttackDifference diff =
        attack_reward_difference(p_after, p_btc, blocks, reward, p_at);
    double rewards_usd = blocks * reward * p_after;
    rows.push_back(Json{{"asset", asset},
                        {"date", date},
                        {"blocks", blocks},
                        {"block_reward", reward},
                        {"price_after_5d", p_after},
                        {"p_btc_change", p_btc},
                        {"rewards_usd", rewards_usd},
                        {"reward_difference", diff.counterfactual_difference},
                        {"actual_minus_counterfactual",
                         diff.have_actual ? diff.actual_minus_counterfactual : 0.0},
                        {"external_utility", ext}});
    csv += csv_escape(asset) + "," + csv_escape(date) + "," + fmt_num(blocks) +
           "," + fmt_num(reward) + "," + fmt_num(rewards_usd) + "," +
           fmt_num(diff.counterfactual_difference) + "," +
           fmt_num(diff.have_actual ? diff.actual_minus_counterfactual : 0.0) +
           "," + fmt_num(ext) + "\r\n";
  }
  Json out{{"tool_version", kToolVersion},
           {"command", "attacks"},
           {"rows", rows}};
  fs::create_directories(g.out);
  write_file((fs::path(g.out) / "attacks.json").string(), out.dump(2) + "\n");
  write_file((fs::path(g.out) / "attacks_report.csv").string(), csv);
  say(g, "attacks: " + std::to_string(rows.size()) + " rows -> " + g.out);
  return 0;
}

int cmd_trace_dump(const std::string& config_path, const GlobalOpts& g) {
  Json cj = load_json_file(config_path);
  ExperimentConfig cfg = parse_experiment(cj);
  apply_overrides(cfg, g);
  StrategyProfile honest(static_cast<std::size_t>(cfg.exec.n()),
                         StrategyDescriptor::honest());
  Trace tr = run_execution(cfg.exec, honest, cfg.seed);
  Json env = report_envelope(cj, cfg.seed);
  fs::create_directories(g.out);
  write_file((fs::path(g.out) / "trace.jsonl").string(),
             env.dump() + "\n" + trace_to_jsonl(tr));
  write_file((fs::path(g.out) / "chain.csv").string(), chain_csv(tr));
  say(g, "trace-dump: " + std::to_string(tr.total_slots()) + " slots -> " + g.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slot-based blockchain execution simulator and compliance analyzer"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--out", g.out, "output directory");
  auto* seed_opt = app.add_option("--seed", g.seed, "master seed override");
  app.add_option("--runs", g.runs, "Monte Carlo runs override");
  app.add_flag("--quiet", g.quiet, "suppress progress output");

  std::string config_path, prices_path, attacks_path;
  auto* sim = app.add_subcommand("simulate", "estimate utilities per profile");
  sim->add_option("config", config_path, "experiment config JSON")->required();
  auto* cone = app.add_subcommand("cone", "explore the reachable-profile cone");
  cone->add_option("config", config_path, "experiment config JSON")->required();
  auto* bounds = app.add_subcommand("bounds", "evaluate closed-form bounds");
  bounds->add_option("params", config_path, "bound parameter JSON")->required();
  auto* attacks = app.add_subcommand("attacks", "double-spend revaluation report");
  attacks->add_option("prices", prices_path, "price history CSV")->required();
  attacks->add_option("attacks", attacks_path, "attack list CSV")->required();
  auto* dump = app.add_subcommand("trace-dump", "dump one all-honest trace");
  dump->add_option("config", config_path, "experiment config JSON")->required();
  for (CLI::App* sub : {sim, cone, bounds, attacks, dump}) sub->fallthrough();

  try {
    app.parse(argc, argv);
    g.seed_set = seed_opt->count() > 0;
    if (sim->parsed()) return cmd_simulate(config_path, g);
    if (cone->parsed()) return cmd_cone(config_path, g);
    if (bounds->parsed()) return cmd_bounds(config_path, g);
    if (attacks->parsed()) return cmd_attacks(prices_path, attacks_path, g);
    if (dump->parsed()) return cmd_trace_dump(config_path, g);
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const clab::PartialResult& e) {
    std::cerr << "partial: " << e.what() << "\n";
    return 3;
  } catch (const clab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
