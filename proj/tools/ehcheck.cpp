// Command line front end: `eval` computes one library value and prints it as
// "re im"; `check` runs a named suite of seeded identity checks and can write
// a machine-readable report.  Exit codes: eval 0/2/3 for ok / unknown
// function / evaluation error, check 0/1/2 for all-pass / failures / bad
// flags.

#include <chrono>
#include <cstdio>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ellhyp/suites.hpp"

using namespace ellhyp;

namespace {

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size())
    throw std::invalid_argument("trailing characters in number '" + s + "'");
  return v;
}

long long parse_int(const std::string& s) {
  std::size_t used = 0;
  long long v = std::stoll(s, &used, 10);
  if (used != s.size())
    throw std::invalid_argument("trailing characters in integer '" + s + "'");
  return v;
}

// Accepted complex forms: "re", "re,im", and "re+imi" / "re-imi" (with the
// pure imaginary "imi" shorthand included).
cplx parse_cplx(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty complex value");
  std::size_t comma = s.find(',');
  if (comma != std::string::npos)
    return {parse_double(s.substr(0, comma)), parse_double(s.substr(comma + 1))};
  if (s.back() == 'i' || s.back() == 'I') {
    std::string body = s.substr(0, s.size() - 1);
    std::size_t pos = std::string::npos;
    for (std::size_t j = body.size(); j-- > 1;) {
      char c = body[j];
      if ((c == '+' || c == '-') && body[j - 1] != 'e' && body[j - 1] != 'E') {
        pos = j;
        break;
      }
    }
    auto imag_part = [](std::string t) {
      if (t.empty() || t == "+") t = "1";
      if (t == "-") t = "-1";
      return parse_double(t);
    };
    if (pos == std::string::npos) return {0.0, imag_part(body)};
    return {parse_double(body.substr(0, pos)), imag_part(body.substr(pos))};
  }
  return {parse_double(s), 0.0};
}

// 15 significant digits; integral values keep a trailing ".0" so both
// components always read as floating point.
std::string fmt_component(double v) {
  if (v == 0.0) v = 0.0;  // print negative zero as "0.0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  std::string s = buf;
  if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
  return s;
}

// Token binding for `eval`: a fixed ordered parameter list filled either
// positionally or by key=value, with an optional variadic tail.
class EvalArgs {
 public:
  EvalArgs(std::vector<std::string> names, const std::vector<std::string>& tokens,
           bool variadic = false)
      : names_(std::move(names)) {
    std::set<std::string> known(names_.begin(), names_.end());
    std::vector<std::string> positional;
    for (const std::string& tok : tokens) {
      std::size_t eq = tok.find('=');
      if (eq != std::string::npos && known.count(tok.substr(0, eq))) {
        values_[tok.substr(0, eq)] = tok.substr(eq + 1);
      } else {
        positional.push_back(tok);
      }
    }
    std::size_t next = 0;
    for (const std::string& tok : positional) {
      while (next < names_.size() && values_.count(names_[next])) ++next;
      if (next < names_.size()) {
        values_[names_[next++]] = tok;
      } else if (variadic) {
        tail_.push_back(tok);
      } else {
        throw std::invalid_argument("unexpected argument '" + tok + "'");
      }
    }
  }

  bool has(const std::string& name) const { return values_.count(name) != 0; }

  cplx c(const std::string& name) const { return parse_cplx(fetch(name)); }
  cplx c(const std::string& name, const cplx& fallback) const {
    return has(name) ? c(name) : fallback;
  }
  long long i(const std::string& name) const { return parse_int(fetch(name)); }
  long long i(const std::string& name, long long fallback) const {
    return has(name) ? i(name) : fallback;
  }
  const std::vector<std::string>& tail() const { return tail_; }

 private:
  const std::string& fetch(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end())
      throw std::invalid_argument("missing parameter '" + name + "'");
    return it->second;
  }
  std::vector<std::string> names_;
  std::map<std::string, std::string> values_;
  std::vector<std::string> tail_;
};

const std::map<std::string, std::string>& eval_signatures() {
  static const std::map<std::string, std::string> sig = {
      {"theta", "x [p]"},
      {"efac", "a k [q] [p]"},
      {"egamma", "x [p] [q]"},
      {"esum", "[n] [z] a1..am b1..bm"},
      {"vsum", "[a] [n] b1 b2 ..."},
      {"rfn", "k x a c d e n"},
      {"sos_weight", "lambda m n k l u"},
      {"fused_weight", "M N a b c d u"},
      {"beta_integral", "t0 t1 t2 t3 t4 [radius]"},
  };
  return sig;
}

void print_eval_usage(std::FILE* out) {
  std::fprintf(out, "usage: ehcheck eval <function> [arg | key=value]...\n");
  std::fprintf(out, "functions:\n");
  for (const auto& [name, args] : eval_signatures())
    std::fprintf(out, "  %-14s %s\n", name.c_str(), args.c_str());
  std::fprintf(out,
               "complex values: re | re+imi | re,im; unset nomes default to "
               "p=0.21+0.06i q=0.31-0.04i\n");
}

cplx eval_value(const std::string& fn, const std::vector<std::string>& tokens) {
  EllipticContext ctx;
  if (fn == "theta") {
    EvalArgs a({"x", "p"}, tokens);
    return theta(a.c("x"), a.c("p", ctx.p), ctx);
  }
  if (fn == "efac") {
    EvalArgs a({"a", "k", "q", "p"}, tokens);
    ctx.q = a.c("q", ctx.q);
    ctx.p = a.c("p", ctx.p);
    return efac(a.c("a"), a.i("k"), ctx);
  }
  if (fn == "egamma") {
    EvalArgs a({"x", "p", "q"}, tokens);
    return egamma(a.c("x"), a.c("p", ctx.p), a.c("q", ctx.q), ctx);
  }
  if (fn == "esum") {
    EvalArgs a({"n", "z", "p", "q"}, tokens, true);
    ctx.p = a.c("p", ctx.p);
    ctx.q = a.c("q", ctx.q);
    SeriesSpec spec;
    spec.n = a.i("n", 0);
    spec.z = a.c("z", {1.0, 0.0});
    const auto& tail = a.tail();
    if (tail.size() % 2 != 0)
      throw std::invalid_argument(
          "esum: numerator and denominator lists must have equal length");
    std::size_t m = tail.size() / 2;
    for (std::size_t j = 0; j < m; ++j) spec.num.push_back(parse_cplx(tail[j]));
    for (std::size_t j = m; j < tail.size(); ++j) spec.den.push_back(parse_cplx(tail[j]));
    return e_sum(spec, ctx).value;
  }
  if (fn == "vsum") {
    EvalArgs a({"a", "n", "p", "q"}, tokens, true);
    ctx.p = a.c("p", ctx.p);
    ctx.q = a.c("q", ctx.q);
    std::vector<cplx> bs;
    for (const std::string& tok : a.tail()) bs.push_back(parse_cplx(tok));
    return v_sum(a.c("a", {0.5, 0.0}), bs, a.i("n", 0), ctx).value;
  }
  if (fn == "rfn") {
    EvalArgs a({"k", "x", "a", "c", "d", "e", "n", "p", "q"}, tokens);
    ctx.p = a.c("p", ctx.p);
    ctx.q = a.c("q", ctx.q);
    BiorthogonalFamily fam =
        make_family(a.c("a"), a.c("c"), a.c("d"), a.c("e"), a.i("n"), ctx);
    return r_fn(a.i("k"), a.c("x"), fam, ctx);
  }
  if (fn == "sos_weight") {
    EvalArgs a({"lambda", "m", "n", "k", "l", "u", "p", "q"}, tokens);
    ctx.p = a.c("p", ctx.p);
    ctx.q = a.c("q", ctx.q);
    return sos_weight(a.c("lambda"), static_cast<int>(a.i("m")),
                      static_cast<int>(a.i("n")), static_cast<int>(a.i("k")),
                      static_cast<int>(a.i("l")), a.c("u"), ctx);
  }
  if (fn == "fused_weight") {
    EvalArgs a({"M", "N", "a", "b", "c", "d", "u", "p", "q"}, tokens);
    ctx.p = a.c("p", ctx.p);
    ctx.q = a.c("q", ctx.q);
    FusedWeightSpec spec;
    spec.M = a.i("M");
    spec.N = a.i("N");
    spec.a = a.c("a");
    spec.b = a.c("b");
    spec.c = a.c("c");
    spec.d = a.c("d");
    spec.u = a.c("u");
    return fused_weight(spec, ctx);
  }
  if (fn == "beta_integral") {
    EvalArgs a({"t0", "t1", "t2", "t3", "t4", "radius", "p", "q"}, tokens);
    ctx.p = a.c("p", ctx.p);
    ctx.q = a.c("q", ctx.q);
    IntegralSpec spec;
    spec.t = {a.c("t0"), a.c("t1"), a.c("t2"), a.c("t3"), a.c("t4")};
    cplx prod{1.0, 0.0};
    for (const cplx& tj : spec.t) prod *= tj;
    spec.t.push_back(ctx.p * ctx.q / prod);
    spec.p = ctx.p;
    spec.q = ctx.q;
    if (a.has("radius")) spec.radius = a.c("radius").real();
    return wp_integral(spec, ctx).value;
  }
  throw std::out_of_range(fn);  // caller maps unknown names to usage + exit 2
}

int run_eval(int argc, char** argv) {
  if (argc < 1) {
    print_eval_usage(stderr);
    return 2;
  }
  std::string fn = argv[0];
  if (fn == "-h" || fn == "--help") {
    print_eval_usage(stdout);
    return 0;
  }
  std::vector<std::string> tokens(argv + 1, argv + argc);
  cplx value;
  try {
    value = eval_value(fn, tokens);
  } catch (const std::out_of_range&) {
    std::fprintf(stderr, "ehcheck eval: unknown function '%s'\n", fn.c_str());
    print_eval_usage(stderr);
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ehcheck eval %s: %s\n", fn.c_str(), e.what());
    return 3;
  }
  std::printf("%s %s\n", fmt_component(value.real()).c_str(),
              fmt_component(value.imag()).c_str());
  return 0;
}

std::string iso_timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

nlohmann::ordered_json report_json(const SuiteReport& rep, bool with_timestamp) {
  nlohmann::ordered_json j;
  j["suite"] = rep.suite;
  j["context"] = {{"p", {rep.ctx.p.real(), rep.ctx.p.imag()}},
                  {"q", {rep.ctx.q.real(), rep.ctx.q.imag()}},
                  {"tol", rep.ctx.tol},
                  {"seed", rep.ctx.rng_seed}};
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const CheckRecord& rec : rep.checks) {
    nlohmann::ordered_json c;
    c["id"] = rec.id;
    c["params"] = rec.params;
    c["residual"] = rec.residual;
    c["scale"] = rec.scale;
    c["pass"] = rec.pass;
    checks.push_back(std::move(c));
  }
  j["checks"] = std::move(checks);
  j["summary"] = {{"total", rep.total()}, {"passed", rep.passed()}, {"failed", rep.failed()}};
  j["wall_ms"] = with_timestamp ? rep.wall_ms : 0.0;
  if (with_timestamp) j["timestamp"] = iso_timestamp();
  return j;
}

void print_report(const SuiteReport& rep) {
  std::printf("suite %s: p=%s q=%s tol=%g seed=%llu\n", rep.suite.c_str(),
              detail::fmt_cplx(rep.ctx.p).c_str(), detail::fmt_cplx(rep.ctx.q).c_str(),
              rep.ctx.tol, static_cast<unsigned long long>(rep.ctx.rng_seed));
  for (std::size_t i = 0; i < rep.checks.size();) {
    std::size_t j = i;
    double worst = 0.0;
    long long failed = 0;
    while (j < rep.checks.size() && rep.checks[j].id == rep.checks[i].id) {
      const CheckRecord& rec = rep.checks[j];
      if (!(rec.ratio() <= worst)) worst = rec.ratio();  // NaN counts as worst
      if (!rec.pass) ++failed;
      ++j;
    }
    std::printf("  %-32s %3zu checks  worst ratio %.3e%s\n", rep.checks[i].id.c_str(),
                j - i, worst, failed ? "  FAIL" : "");
    if (failed) {
      for (std::size_t k = i; k < j; ++k) {
        if (rep.checks[k].pass) continue;
        std::printf("    trial %lld: residual %.3e scale %.3e  %s\n", rep.checks[k].trial,
                    rep.checks[k].residual, rep.checks[k].scale,
                    rep.checks[k].params.c_str());
      }
    }
    i = j;
  }
  std::printf("summary: total=%lld passed=%lld failed=%lld (%.1f ms)\n", rep.total(),
              rep.passed(), rep.failed(), rep.wall_ms);
}

// key=value lines mirroring the check flags; command line values win.
void apply_config_file(const std::string& path, CLI::App& app, std::uint64_t& seed,
                       int& trials, double& tol, std::string& p_str, std::string& q_str,
                       std::string& json_path, bool& no_timestamp) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::size_t eq = line.find('=', start);
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    auto trim = [](std::string s) {
      std::size_t b = s.find_first_not_of(" \t");
      std::size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(start, eq - start));
    std::string val = trim(line.substr(eq + 1));
    auto given = [&](const std::string& flag) { return app.count(flag) > 0; };
    if (key == "seed") {
      if (!given("--seed")) seed = static_cast<std::uint64_t>(std::stoull(val));
    } else if (key == "trials") {
      if (!given("--trials")) trials = static_cast<int>(parse_int(val));
    } else if (key == "tol") {
      if (!given("--tol")) tol = parse_double(val);
    } else if (key == "p") {
      if (!given("--p")) p_str = val;
    } else if (key == "q") {
      if (!given("--q")) q_str = val;
    } else if (key == "json") {
      if (!given("--json")) json_path = val;
    } else if (key == "no_timestamp") {
      if (!given("--no-timestamp"))
        no_timestamp = (val == "1" || val == "true" || val == "yes");
    } else {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    }
  }
}

int run_check(int argc, char** argv) {
  CLI::App app{"run a named suite of seeded identity checks"};
  app.name("ehcheck check");

  std::string suite;
  std::uint64_t seed = 1;
  int trials = 10;
  double tol = 1e-9;
  std::string p_str, q_str, json_path, config_path;
  bool no_timestamp = false;

  std::string suite_list = "all";
  for (const std::string& s : suite_names()) suite_list += ", " + s;
  app.add_option("suite", suite, "one of: " + suite_list)->required();
  app.add_option("--seed", seed, "root seed for all draws");
  app.add_option("--trials", trials, "trials per randomized check")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "pass threshold on residual/scale")
      ->check(CLI::PositiveNumber);
  app.add_option("--p", p_str, "first nome (re | re+imi | re,im)");
  app.add_option("--q", q_str, "second nome");
  app.add_option("--json", json_path, "write the report to this path");
  app.add_flag("--no-timestamp", no_timestamp,
               "omit timestamp and zero wall_ms so reports are reproducible");
  app.add_option("--config", config_path,
                 "key=value file mirroring these flags (flags win)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  EllipticContext ctx;
  try {
    if (!config_path.empty())
      apply_config_file(config_path, app, seed, trials, tol, p_str, q_str, json_path,
                        no_timestamp);
    if (!p_str.empty()) ctx.p = parse_cplx(p_str);
    if (!q_str.empty()) ctx.q = parse_cplx(q_str);
    ctx.tol = tol;
    ctx.rng_seed = seed;
    ctx.require_valid();
    if (suite != "all") {
      const auto& names = suite_names();
      if (std::find(names.begin(), names.end(), suite) == names.end())
        throw std::invalid_argument("unknown suite '" + suite + "'; expected " +
                                    suite_list);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ehcheck check: %s\n", e.what());
    return 2;
  }

  auto start = std::chrono::steady_clock::now();
  SuiteReport rep = run_suite(suite, ctx, trials);
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  if (no_timestamp) rep.wall_ms = 0.0;

  print_report(rep);

  if (!json_path.empty()) {
    std::ofstream out(json_path, std::ios::binary);
    if (!out) {
      std::fprintf(stderr, "ehcheck check: cannot write '%s'\n", json_path.c_str());
      return 2;
    }
    out << report_json(rep, !no_timestamp).dump(2) << '\n';
  }
  return rep.ok() ? 0 : 1;
}

void print_usage(std::FILE* out) {
  std::fprintf(out,
               "usage:\n"
               "  ehcheck eval <function> [arg | key=value]...\n"
               "  ehcheck check <suite> [--seed S] [--trials T] [--tol e] [--p v] "
               "[--q v]\n"
               "                [--json PATH] [--no-timestamp] [--config FILE]\n");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage(stderr);
    return 2;
  }
  std::string cmd = argv[1];
  if (cmd == "eval") return run_eval(argc - 2, argv + 2);
  if (cmd == "check") return run_check(argc - 1, argv + 1);
  if (cmd == "-h" || cmd == "--help" || cmd == "help") {
    print_usage(stdout);
    return 0;
  }
  std::fprintf(stderr, "ehcheck: unknown command '%s'\n", cmd.c_str());
  print_usage(stderr);
  return 2;
}
