#include "focal/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "focal/boundary.hpp"
#include "focal/trees.hpp"
#include "text.hpp"

namespace focal {

namespace {

struct Config {
  std::string family = "lamplighter:2";
  int radius = -1;
  std::string window;
  std::int64_t horizon = -1;
  std::uint64_t seed = 0x5eed;
  std::string format = "json";
  std::string out;
  bool unchecked = false;

  // per-command inputs
  std::vector<std::string> positional;
  std::string word;
  std::string generators;
  std::string conjugates;
  std::string delta;
  std::size_t samples = 0;
  std::size_t cutoff = 64;
  bool exhaustive = false;
  int tree_k = 0;
};

struct Context {
  Config cfg;
  FamilyPtr family;
  Window window;

  int radius_or(int fallback) const { return cfg.radius >= 0 ? cfg.radius : fallback; }
  std::int64_t horizon_or(std::int64_t fallback) const { return cfg.horizon >= 0 ? cfg.horizon : fallback; }

  GroupPoint point(const std::string& word) const { return evaluate(*family, parse_word(*family, word)); }

  nlohmann::json scope(std::optional<int> radius, std::optional<std::int64_t> horizon) const {
    nlohmann::json j = {{"family", family->config()}, {"seed", cfg.seed}, {"window", window.to_json()}};
    j["radius"] = radius ? nlohmann::json(*radius) : nlohmann::json();
    j["horizon"] = horizon ? nlohmann::json(*horizon) : nlohmann::json();
    return j;
  }
};

struct Output {
  std::string text;
  int code = 0;
};

Output json_output(const nlohmann::json& j, int code = 0) { return {j.dump(2) + "\n", code}; }

void require_json(const Config& cfg, const char* command) {
  if (cfg.format != "json") {
    throw std::invalid_argument(std::string(command) + ": only --format json is supported");
  }
}

std::string q_str(const mpq_class& q) { return q.get_str(); }

std::vector<GroupPoint> parse_points(const Context& ctx, const std::string& list) {
  std::vector<GroupPoint> out;
  for (const auto& w : text::split_top_level(list, ',')) out.push_back(ctx.point(w));
  return out;
}

mpq_class delta_for(const Context& ctx) {
  if (!ctx.cfg.delta.empty()) {
    mpq_class d;
    if (d.set_str(ctx.cfg.delta, 10) != 0 || d < 0) throw std::invalid_argument("--delta: bad rational");
    d.canonicalize();
    return d;
  }
  BallOptions o;
  o.window = ctx.window;
  o.seed = ctx.cfg.seed;
  const Ball ball = ball_points(*ctx.family, 3, o);
  return four_point_delta(ball.distances, {.exhaustive_cutoff = 400, .samples = 2'000'000, .seed = ctx.cfg.seed})
      .delta.to_rational();
}

BusemannGraph tree_spec(const std::string& spec, unsigned levels) {
  if (spec == "line") return regular_tree_ball(1, levels);
  if (spec.size() >= 2 && (spec[0] == 'T' || spec[0] == 't')) {
    const auto degree = text::parse_int(spec.substr(1));
    if (degree < 2) throw std::invalid_argument("tree spec: degree must be >= 2");
    return regular_tree_ball(static_cast<unsigned>(degree - 1), levels);
  }
  throw std::invalid_argument("tree spec: expected 'line' or T<degree>, got '" + spec + "'");
}

nlohmann::json graph_stats(const BusemannGraph& g, std::size_t delta_cutoff, std::uint64_t seed) {
  std::map<std::size_t, std::size_t> degrees;
  for (std::size_t v = 0; v < g.size(); ++v) ++degrees[g.degree(v)];
  nlohmann::json deg = nlohmann::json::object();
  for (const auto& [d, count] : degrees) deg[std::to_string(d)] = count;
  std::int64_t lo = g.level(0), hi = g.level(0);
  for (std::size_t v = 0; v < g.size(); ++v) {
    lo = std::min(lo, g.level(v));
    hi = std::max(hi, g.level(v));
  }
  nlohmann::json j = {{"vertices", g.size()},
                      {"edges", g.edge_count()},
                      {"connected", g.is_connected()},
                      {"is_tree", g.is_tree()},
                      {"degree_histogram", deg},
                      {"max_degree", degrees.empty() ? 0 : degrees.rbegin()->first},
                      {"levels", {lo, hi}}};
  if (g.is_connected()) {
    j["delta"] = four_point_delta(g.distance_matrix(), {.exhaustive_cutoff = delta_cutoff, .samples = 2'000'000, .seed = seed})
                     .to_json();
  }
  return j;
}

// ------------------------------------------------------------------ Commands

Output cmd_verify(const Context& ctx) {
  require_json(ctx.cfg, "verify");
  const ConfiningReport confining = verify_confining(*ctx.family, ctx.window);
  nlohmann::json j = {{"scope", ctx.scope(std::nullopt, std::nullopt)}, {"confining", confining.to_json()}};
  bool pass = confining.pass;
  for (const auto& c : confining.checks) {
    if (!c.pass && !j.contains("counterexample")) j["counterexample"] = c.name + ": " + c.counterexample.value_or("?");
  }
  if (ctx.family->a_length_validated() || ctx.cfg.unchecked) {
    const auto nadic_like = ctx.family->n0() > 0;
    const DistortionReport distortion =
        distortion_check(*ctx.family, 3, ctx.window, nadic_like ? 1000 : 0, ctx.cfg.seed);
    j["distortion"] = distortion.to_json();
    pass = pass && distortion.pass;
    for (const auto& level : distortion.levels) {
      if (level.counterexample && !j.contains("counterexample")) {
        j["counterexample"] = "distortion at m = " + std::to_string(level.m) + ": " + *level.counterexample;
      }
    }
  } else {
    j["distortion"] = {{"skipped", "A-length not validated for this family"}};
  }
  j["pass"] = pass;
  return json_output(j, pass ? 0 : 2);
}

Output cmd_ball(const Context& ctx) {
  const int r = ctx.radius_or(3);
  BallOptions o;
  o.window = ctx.window;
  o.samples = ctx.cfg.samples;
  o.seed = ctx.cfg.seed;
  o.unchecked = ctx.cfg.unchecked;
  const Ball ball = ball_points(*ctx.family, r, o);
  if (ctx.cfg.format == "csv") return {ball.distances.to_csv(), 0};
  if (ctx.cfg.format == "dot") return {ball.to_dot(), 0};
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : ball.points) pts.push_back(point_to_json(*ctx.family, p));
  return json_output({{"scope", ctx.scope(r, std::nullopt)},
                      {"exhaustive", ball.exhaustive},
                      {"n_points", ball.points.size()},
                      {"ids", ball.distances.ids()},
                      {"points", pts},
                      {"is_metric", ball.distances.is_metric()}});
}

Output cmd_delta(const Context& ctx) {
  require_json(ctx.cfg, "delta");
  const int r = ctx.radius_or(4);
  const DeltaOptions dopt{.exhaustive_cutoff = ctx.cfg.exhaustive ? SIZE_MAX : ctx.cfg.cutoff,
                          .samples = 2'000'000,
                          .seed = ctx.cfg.seed};
  if (ctx.cfg.tree_k > 0) {
    const BusemannGraph g = regular_tree_ball(static_cast<unsigned>(ctx.cfg.tree_k), static_cast<unsigned>(r));
    const DeltaReport rep = four_point_delta(g.distance_matrix(), dopt);
    return json_output({{"scope", {{"tree_k", ctx.cfg.tree_k}, {"radius", r}, {"seed", ctx.cfg.seed}, {"window", nullptr}, {"horizon", nullptr}}},
                        {"delta", rep.to_json()}});
  }
  BallOptions o;
  o.window = ctx.window;
  o.samples = ctx.cfg.samples;
  o.seed = ctx.cfg.seed;
  o.unchecked = ctx.cfg.unchecked;
  const Ball ball = ball_points(*ctx.family, r, o);
  const DeltaReport rep = four_point_delta(ball.distances, dopt);
  const unsigned n0 = ctx.family->n0();
  const bool pass = delta_bound_holds(rep.delta, n0);
  nlohmann::json j = {{"scope", ctx.scope(r, std::nullopt)},
                      {"delta", rep.to_json()},
                      {"ball_exhaustive", ball.exhaustive},
                      {"n0", n0},
                      {"bound", {{"expr", "16*log2(" + std::to_string(n0 + 2) + ")"}, {"approx", delta_bound_value(n0)}}},
                      {"pass", pass}};
  return json_output(j, pass ? 0 : 2);
}

Output cmd_nf(const Context& ctx) {
  require_json(ctx.cfg, "nf");
  const std::string text = !ctx.cfg.word.empty() ? ctx.cfg.word
                           : ctx.cfg.positional.empty() ? std::string()
                                                        : ctx.cfg.positional.front();
  const Family& f = *ctx.family;
  const Word w = parse_word(f, text);
  const GroupPoint x = evaluate(f, w);
  const NormalForm nf = rewrite_to_normal_form(f, w);
  const NormalForm geo = geodesic_normal_form(f, x, ctx.cfg.unchecked);
  return json_output({{"scope", ctx.scope(std::nullopt, std::nullopt)},
                      {"word", format_word(f, w)},
                      {"word_length_of_input", w.size()},
                      {"value", point_to_json(f, x)},
                      {"normal_form", {{"i", nf.i}, {"k", nf.k()}, {"j", nf.j}, {"word", format_word(f, nf.to_word())}, {"length", nf.length()}}},
                      {"distance_from_identity", word_length(f, x, ctx.cfg.unchecked)},
                      {"geodesic", {{"i", geo.i}, {"k", geo.k()}, {"j", geo.j}, {"word", format_word(f, geo.to_word())}}},
                      {"k0", k0_bound(f.n0())}});
}

Output cmd_dist(const Context& ctx) {
  require_json(ctx.cfg, "dist");
  const auto& pos = ctx.cfg.positional;
  if (pos.empty() || pos.size() > 2) throw std::invalid_argument("dist: expected one or two words");
  const GroupPoint x = pos.size() == 2 ? ctx.point(pos[0]) : identity_point(*ctx.family);
  const GroupPoint y = ctx.point(pos.back());
  return json_output({{"scope", ctx.scope(std::nullopt, std::nullopt)},
                      {"x", format_point(*ctx.family, x)},
                      {"y", format_point(*ctx.family, y)},
                      {"distance", distance(*ctx.family, x, y, ctx.cfg.unchecked)}});
}

Output cmd_classify(const Context& ctx) {
  require_json(ctx.cfg, "classify");
  const Family& f = *ctx.family;
  if (!ctx.cfg.word.empty()) {
    const std::int64_t N = ctx.horizon_or(16);
    const GroupPoint g = ctx.point(ctx.cfg.word);
    return json_output({{"scope", ctx.scope(std::nullopt, N)},
                        {"element", format_point(f, g)},
                        {"isometry_type", isometry_type(f, g, N).to_json()},
                        {"translation_number", translation_number(f, g, N).to_json()}});
  }
  const std::int64_t L = ctx.horizon_or(8);
  ActionTypeOptions opt;
  opt.delta = delta_for(ctx);
  std::vector<GroupPoint> gens;
  if (!ctx.cfg.generators.empty()) gens = parse_points(ctx, ctx.cfg.generators);
  if (!ctx.cfg.conjugates.empty()) {
    const std::vector<GroupPoint> base = parse_points(ctx, ctx.cfg.conjugates);
    const FamilyPtr fam = ctx.family;
    opt.generators_at = [fam, base, gens](std::int64_t l) {
      std::vector<GroupPoint> out = gens;
      for (std::int64_t j = 0; j <= l; ++j) {
        for (const auto& a : base) out.push_back({fam->alpha_pow(a.h, -j), a.m});
      }
      return out;
    };
  }
  if (gens.empty() && !opt.generators_at) throw std::invalid_argument("classify: give --word, --generators or --conjugates");
  const ActionTypeReport rep = action_type(f, gens, L, opt);
  return json_output({{"scope", ctx.scope(std::nullopt, L)}, {"delta_used", q_str(opt.delta)}, {"action_type", rep.to_json()}});
}

Output cmd_beta(const Context& ctx) {
  require_json(ctx.cfg, "beta");
  const std::string text = !ctx.cfg.word.empty() ? ctx.cfg.word
                           : ctx.cfg.positional.empty() ? std::string("a+")
                                                        : ctx.cfg.positional.front();
  const std::int64_t N = ctx.horizon_or(8);
  const GroupPoint g = ctx.point(text);
  return json_output({{"scope", ctx.scope(std::nullopt, N)},
                      {"element", format_point(*ctx.family, g)},
                      {"beta", busemann_quasicharacter(*ctx.family, g, N).to_json()}});
}

Output cmd_tree(const Context& ctx) {
  const Family& f = *ctx.family;
  require_lamplighter(f);
  const int r = ctx.radius_or(3);
  const BusemannGraph ball = bass_serre_ball(f, TreeVertex{}, static_cast<unsigned>(r));
  if (ctx.cfg.format == "csv") return {ball.to_csv(), 0};
  if (ctx.cfg.format == "dot") return {ball.to_dot(), 0};
  nlohmann::json j = {{"scope", ctx.scope(r, std::nullopt)},
                      {"compaction_index", compaction_index(f)},
                      {"ball", graph_stats(ball, ctx.cfg.cutoff, ctx.cfg.seed)}};
  if (!ctx.cfg.word.empty()) {
    const GroupPoint g = ctx.point(ctx.cfg.word);
    const TreeVertex v0;
    const TreeVertex gv = tree_act(f, g, v0);
    j["action"] = {{"element", format_point(f, g)},
                   {"image_of_base_vertex", format_vertex(gv)},
                   {"tree_distance", tree_distance(v0, gv)},
                   {"word_length", word_length(f, g)},
                   {"level_shift", tree_level(gv) - tree_level(v0)}};
  }
  return json_output(j);
}

Output cmd_millefeuille(const Context& ctx) {
  const auto& pos = ctx.cfg.positional;
  if (pos.size() != 2) throw std::invalid_argument("millefeuille: expected two tree specs, e.g. T3 T3");
  const unsigned levels = static_cast<unsigned>(ctx.radius_or(3));
  const BusemannGraph product = millefeuille(tree_spec(pos[0], levels), tree_spec(pos[1], levels));
  if (ctx.cfg.format == "csv") return {product.to_csv(), 0};
  if (ctx.cfg.format == "dot") return {product.to_dot(), 0};
  return json_output({{"scope", {{"factors", pos}, {"radius", levels}, {"seed", ctx.cfg.seed}, {"window", nullptr}, {"horizon", nullptr}}},
                      {"millefeuille", graph_stats(product, std::max<std::size_t>(ctx.cfg.cutoff, 400), ctx.cfg.seed)}});
}

Output cmd_schottky(const Context& ctx) {
  require_json(ctx.cfg, "schottky");
  const auto& pos = ctx.cfg.positional;
  if (pos.size() != 2) throw std::invalid_argument("schottky: expected two words a b");
  const std::int64_t L = ctx.horizon_or(10);
  if (L < 0 || L > 14) throw std::invalid_argument("schottky: --horizon must be in [0, 14]");
  const SchottkyReport rep =
      schottky_semigroup_check(*ctx.family, ctx.point(pos[0]), ctx.point(pos[1]), static_cast<unsigned>(L));
  return json_output({{"scope", ctx.scope(std::nullopt, L)}, {"schottky", rep.to_json()}}, rep.accepted ? 0 : 2);
}

Output cmd_report(const Context& ctx) {
  require_json(ctx.cfg, "report");
  const Family& f = *ctx.family;
  const int r = ctx.radius_or(3);
  const std::int64_t N = ctx.horizon_or(8);
  nlohmann::json j = {{"scope", ctx.scope(r, N)}};
  const ConfiningReport confining = verify_confining(f, ctx.window);
  j["confining"] = confining.to_json();
  bool pass = confining.pass;
  if (f.a_length_validated()) {
    BallOptions o;
    o.window = ctx.window;
    o.seed = ctx.cfg.seed;
    const Ball ball = ball_points(f, r, o);
    const DeltaReport rep = four_point_delta(ball.distances, {.exhaustive_cutoff = ctx.cfg.cutoff, .samples = 2'000'000, .seed = ctx.cfg.seed});
    j["delta"] = rep.to_json();
    j["delta_bound_holds"] = delta_bound_holds(rep.delta, f.n0());
    pass = pass && delta_bound_holds(rep.delta, f.n0());
    j["beta_alpha"] = busemann_quasicharacter(f, alpha_point(f), N).to_json();
    j["alpha_type"] = isometry_type(f, alpha_point(f), N).to_json();
    try {
      j["compaction_index"] = compaction_index(f);
    } catch (const UnsupportedOperation& e) {
      j["compaction_index"] = e.what();
    }
  }
  j["pass"] = pass;
  return json_output(j, pass ? 0 : 2);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact computations in focal groups H x| Z with confining automorphisms", "focal"};
  app.require_subcommand(1);
  app.fallthrough();
  Config cfg;
  app.add_option("--family", cfg.family, "Family spec: lamplighter:q, nadic:n, product(a,b), identity_alpha(a) or JSON");
  app.add_option("--radius", cfg.radius, "Ball radius / tree levels")->check(CLI::NonNegativeNumber);
  app.add_option("--window", cfg.window, "Window, e.g. lo=-3,hi=3,den=3,abs=2");
  app.add_option("--horizon", cfg.horizon, "Horizon N or L")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", cfg.seed, "Seed for sampled computations");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv", "dot"}));
  app.add_option("--out", cfg.out, "Write the report to PATH");
  app.add_flag("--unchecked", cfg.unchecked, "Allow families whose A-length is unvalidated");
  app.add_option("--word", cfg.word, "Element as a word, e.g. \"a- g{0:1} a+\"");
  app.add_option("--generators", cfg.generators, "Comma-separated generator words");
  app.add_option("--conjugates", cfg.conjugates, "Generators a whose conjugates alpha^-j(a), j <= l, join at horizon l");
  app.add_option("--delta", cfg.delta, "Hyperbolicity constant for classification (default: computed)");
  app.add_option("--samples", cfg.samples, "Sample this many ball points (0 = all windowed points)");
  app.add_option("--cutoff", cfg.cutoff, "Largest point set scanned exhaustively for delta");
  app.add_flag("--exhaustive", cfg.exhaustive, "Always scan every quadruple");
  app.add_option("--tree", cfg.tree_k, "delta: use the (k+1)-regular tree ball instead of the group")->check(CLI::PositiveNumber);

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"verify", "Check the confining axioms and the distortion inclusion"},
      {"ball", "Windowed ball with pairwise word distances"},
      {"delta", "Four-point delta of a ball against 16 log2(n0 + 2)"},
      {"nf", "Normal form and geodesic of a word"},
      {"dist", "Word distance between one or two words"},
      {"classify", "Isometry type of --word, or action type of --generators/--conjugates"},
      {"beta", "Busemann character of a word"},
      {"tree", "Bass-Serre tree ball and action (lamplighter)"},
      {"millefeuille", "Fiber product of two tree balls: line or T<degree>"},
      {"schottky", "Schottky pair check for two words"},
      {"report", "Summary report for a family"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("args", cfg.positional, "Positional arguments");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  Output result;
  try {
    Context ctx;
    ctx.cfg = cfg;
    ctx.family = parse_family(cfg.family);
    if (!cfg.window.empty()) ctx.window = Window::parse(cfg.window);
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "verify") result = cmd_verify(ctx);
    else if (name == "ball") result = cmd_ball(ctx);
    else if (name == "delta") result = cmd_delta(ctx);
    else if (name == "nf") result = cmd_nf(ctx);
    else if (name == "dist") result = cmd_dist(ctx);
    else if (name == "classify") result = cmd_classify(ctx);
    else if (name == "beta") result = cmd_beta(ctx);
    else if (name == "tree") result = cmd_tree(ctx);
    else if (name == "millefeuille") result = cmd_millefeuille(ctx);
    else if (name == "schottky") result = cmd_schottky(ctx);
    else result = cmd_report(ctx);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  if (!cfg.out.empty()) {
    std::ofstream file(cfg.out, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << cfg.out << "\n";
      return 1;
    }
    file << result.text;
  } else {
    out << result.text;
  }
  return result.code;
}

}  // namespace focal
