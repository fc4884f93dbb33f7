#include "tenrank/cli.hpp"

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "tenrank/serialize.hpp"

namespace tenrank {
namespace {

struct Options {
  std::string input;
  std::string decomp;
  std::string cert;
  std::string tol_config;
  std::string method = "all";
  std::string flavor;
  std::string field = "real";
  std::uint64_t seed = 0;
  bool timing = false;
  bool symmetric = false;
  int rmax = 0;
  int restarts = 8;
  int n = 4;
  int count = 50;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json input_digest(const json& jt, const std::string& raw) {
  return json{{"shape", jt.value("shape", json::array())},
              {"field", jt.value("field", "real")},
              {"checksum", fnv1a_hex(raw)}};
}

template <class S>
int default_rmax(const Tensor3<S>& T) {
  const Eigen::Index m = T.dim0(), n = T.dim1(), p = T.dim2();
  return static_cast<int>(std::min<Eigen::Index>({m * n, n * p, m * p, 12}));
}

// ---------------------------------------------------------------------------
// Per-subcommand handlers: tensor in, results JSON out.

template <class S>
json do_bound(const Tensor3<S>& T, const Options& o, const TolerancePolicy& pol) {
  json out;
  int best = 0;
  if (o.method == "strassen" || o.method == "all") {
    auto [rot, coeffs] = rotate_to_invertible_first_slice(T, pol, o.seed);
    const BoundReport rep = strassen_bound(rot, pol);
    json j = bound_report_to_json(rep);
    j["rotation_coeffs"] = {coeffs(0), coeffs(1), coeffs(2)};
    out["strassen"] = std::move(j);
    best = std::max(best, rep.value);
  }
  if (o.method == "koszul" || o.method == "all") {
    const BoundReport rep = koszul_bound(T, pol);
    out["koszul"] = bound_report_to_json(rep);
    best = std::max(best, rep.value);
  }
  out["value"] = best;
  out["applies_to_border_rank"] = true;
  return out;
}

template <class S>
json do_odeco(const Tensor3<S>& T, bool decompose, const Options& o,
              const TolerancePolicy& pol) {
  const OdecoFlavor flavor = OdecoFlavor::parse(o.flavor);
  Tensor3<S> Tn = T;
  if (flavor.symmetric && !Tn.symmetric()) Tn.mark_symmetric();
  json out;
  const CheckReport rep = odeco_check(Tn, flavor, pol);
  out["odeco"] = rep.ok;
  out["report"] = check_report_to_json(rep);
  if (decompose) {
    const OdecoDecomposition<S> dec = odeco_decompose(Tn, flavor, pol, o.seed);
    out["residual"] = dec.residual;
    out["decomposition"] = decomposition_to_json(dec.folded());
  }
  return out;
}

template <class S>
json do_ind(const Tensor3<S>& T, bool decompose, const Options& o,
            const TolerancePolicy& pol) {
  json out;
  const IndCheck<S> chk = indordi_check(T, pol, o.seed);
  out["independent"] = chk.ok;
  out["witness_coeffs"] = vector_to_json(chk.witness_coeffs);
  out["report"] = check_report_to_json(chk.report);
  if (decompose) {
    const Decomposition<S> D = jennrich_decompose(T, pol, o.seed);
    const Tensor3<S> R = assemble(D, T.dim0(), T.dim1(), T.dim2());
    out["residual"] = (T - R).norm() / std::max(1e-300, T.norm());
    out["decomposition"] = decomposition_to_json(D);
  }
  return out;
}

template <class S>
Decomposition<S> witness_decomposition(const Tensor3<S>& T, const Options& o,
                                       const TolerancePolicy& pol) {
  if (!o.decomp.empty())
    return decomposition_from_json<S>(json::parse(read_file(o.decomp)));
  const RankBracket<S> br =
      rank_bracket(T, o.rmax > 0 ? o.rmax : default_rmax(T), o.restarts,
                   o.seed, pol);
  if (!br.has_upper)
    throw ResidualError("embed: no witnessing decomposition found (pass --decomp)",
                        1.0);
  return br.witness;
}

template <class S>
json do_embed(const Tensor3<S>& T, const std::string& kind, const Options& o,
              const TolerancePolicy& pol) {
  const auto Zs = slices(T, Axis::Z);
  Embedding<S> E;
  if (kind == "trivial") {
    E = trivial_embed_2n(Zs, pol);
  } else if (kind == "pair") {
    if (Zs.size() == 2)
      E = strassen_pair_embed(Zs[0], Zs[1], pol);
    else if (Zs.size() == 3)
      E = strassen_pair_embed(Zs[1], Zs[2], pol);
    else
      throw PreconditionError("embed pair: tensor must have 2 or 3 z-slices");
  } else if (kind == "commuting") {
    E = commuting_embed(Zs, witness_decomposition(T, o, pol), pol);
  } else {  // first-identity
    E = first_slice_identity_embed(T, witness_decomposition(T, o, pol), pol);
  }
  json out = embedding_to_json(E);
  if (kind == "pair") {
    const std::size_t a = Zs.size() == 2 ? 0 : 1;
    out["necessary_condition_holds"] =
        embedding_pair_bound(Zs[a], Zs[a + 1], E.N, pol);
  }
  if (kind == "commuting" || kind == "first-identity") {
    try {
      auto [N, D] = embedding_to_rank_bound(E, pol, o.seed);
      out["rank_bound"] = N;
      out["witness"] = decomposition_to_json(D);
    } catch (const Error&) {
      out["rank_bound"] = nullptr;
    }
  }
  return out;
}

template <class S>
json do_certify_build(const Tensor3<S>& T, bool ortho, const Options& o,
                      const TolerancePolicy& pol) {
  if (o.decomp.empty())
    throw PreconditionError("certify build: --decomp is required");
  Tensor3<S> Tn = T;
  const Decomposition<S> D =
      decomposition_from_json<S>(json::parse(read_file(o.decomp)));
  json out;
  if (ortho) {
    const OdecoFlavor flavor = OdecoFlavor::parse(
        o.flavor.empty() ? std::string(field_name(scalar_traits<S>::field))
                         : o.flavor);
    if (flavor.symmetric && !Tn.symmetric()) Tn.mark_symmetric();
    RankCertificate<S> cert = build_rank_certificate(Tn, D, flavor, pol);
    cert.seed = o.seed;
    const bool ok = verify_rank_certificate(cert, pol);
    out["certificate"] = rank_certificate_to_json(cert);
    out["verified"] = ok;
  } else {
    if (o.symmetric && !Tn.symmetric()) Tn.mark_symmetric();
    IndCertificate<S> cert =
        build_ind_certificate(Tn, D, o.symmetric, pol, o.seed);
    const bool ok = verify_ind_certificate(cert, pol, o.seed);
    out["certificate"] = ind_certificate_to_json(cert);
    out["verified"] = ok;
  }
  return out;
}

template <class S>
json do_certify_verify(const json& jc, const Options& o,
                       const TolerancePolicy& pol) {
  const std::string kind = jc.value("kind", "");
  json out;
  if (kind == "ortho_rank_certificate") {
    RankCertificate<S> cert = rank_certificate_from_json<S>(jc);
    if (cert.flavor.symmetric) {
      if (!cert.tensor.symmetric()) cert.tensor.mark_symmetric();
      if (!cert.supertensor.symmetric()) cert.supertensor.mark_symmetric();
    }
    out["verified"] = verify_rank_certificate(cert, pol);
    out["certificate"] = rank_certificate_to_json(cert);
  } else if (kind == "ind_rank_certificate") {
    IndCertificate<S> cert = ind_certificate_from_json<S>(jc);
    if (cert.symmetric) {
      if (!cert.tensor.symmetric()) cert.tensor.mark_symmetric();
      if (!cert.supertensor.symmetric()) cert.supertensor.mark_symmetric();
    }
    out["verified"] = verify_ind_certificate(cert, pol, o.seed);
    out["certificate"] = ind_certificate_to_json(cert);
  } else {
    throw PreconditionError("certify verify: unknown certificate kind: " + kind);
  }
  return out;
}

template <class S>
json do_oracle(const Tensor3<S>& T, const Options& o,
               const TolerancePolicy& pol) {
  const int rmax = o.rmax > 0 ? o.rmax : default_rmax(T);
  return rank_bracket_to_json(rank_bracket(T, rmax, o.restarts, o.seed, pol));
}

template <class S>
json do_selftest(const Options& o, const TolerancePolicy& pol) {
  Rng rng(o.seed ^ 0xa0761d6478bd642fULL);
  const Eigen::Index n = o.n;
  double worst = 0;
  for (int t = 0; t < o.count; ++t) {
    MatrixX<S> A1;
    for (int draw = 0; draw < 100; ++draw) {
      A1 = rng.matrix<S>(n, n);
      Eigen::JacobiSVD<MatrixX<S>> svd(A1);
      const auto& sv = svd.singularValues();
      if (sv(sv.size() - 1) > 0.02 * sv(0)) break;  // keep it well-conditioned
    }
    const Tensor3<S> T =
        from_z_slices<S>({A1, rng.matrix<S>(n, n), rng.matrix<S>(n, n)});
    worst = std::max(worst, det_identity_residual(T, pol));
  }
  return json{{"count", o.count},
              {"n", o.n},
              {"field", field_name(scalar_traits<S>::field)},
              {"max_residual", worst},
              {"pass", worst < pol.residual_tol}};
}

// ---------------------------------------------------------------------------

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  Options o;
  CLI::App app{"tenrank: tensor rank bounds, orthogonal/independent "
               "decompositions, and commuting embeddings"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub, bool needs_input) {
    if (needs_input)
      sub->add_option("--input", o.input, "tensor JSON file")->required();
    sub->add_option("--seed", o.seed, "RNG seed (default 0)");
    sub->add_option("--tol-config", o.tol_config,
                    "tolerance policy JSON file (defaults documented in README)");
    sub->add_flag("--timing", o.timing, "include wall time in the report "
                                        "(breaks byte-level determinism)");
  };

  CLI::App* bound = app.add_subcommand("bound", "rank lower bounds for n x n x 3");
  add_common(bound, true);
  bound->add_option("--method", o.method, "strassen | koszul | all")
      ->check(CLI::IsMember({"strassen", "koszul", "all"}));

  CLI::App* odeco = app.add_subcommand("odeco", "orthogonal decomposability");
  odeco->require_subcommand(1);
  for (const char* mode : {"check", "decompose"}) {
    CLI::App* sub = odeco->add_subcommand(mode);
    add_common(sub, true);
    sub->add_option("--flavor", o.flavor,
                    "sym-real | sym-complex | real | complex")
        ->required();
  }

  CLI::App* ind = app.add_subcommand("ind", "independent decomposability");
  ind->require_subcommand(1);
  for (const char* mode : {"check", "decompose"})
    add_common(ind->add_subcommand(mode), true);

  CLI::App* embed = app.add_subcommand("embed", "commuting embeddings");
  embed->require_subcommand(1);
  for (const char* kind : {"trivial", "pair", "commuting", "first-identity"}) {
    CLI::App* sub = embed->add_subcommand(kind);
    add_common(sub, true);
    if (std::string(kind) == "commuting" || std::string(kind) == "first-identity") {
      sub->add_option("--decomp", o.decomp,
                      "decomposition JSON (omit to search with the oracle)");
      sub->add_option("--rmax", o.rmax, "oracle fallback: max rank to try");
      sub->add_option("--restarts", o.restarts, "oracle fallback: ALS restarts");
    }
  }

  CLI::App* certify = app.add_subcommand("certify", "rank certificates");
  certify->require_subcommand(1);
  for (const char* family : {"ortho", "ind"}) {
    CLI::App* fam = certify->add_subcommand(family);
    fam->require_subcommand(1);
    CLI::App* build = fam->add_subcommand("build");
    add_common(build, true);
    build->add_option("--decomp", o.decomp, "witnessing decomposition JSON")
        ->required();
    if (std::string(family) == "ortho")
      build->add_option("--flavor", o.flavor,
                        "sym-real | sym-complex | real | complex");
    else
      build->add_flag("--symmetric", o.symmetric, "symmetric (srank) certificate");
    CLI::App* verify = fam->add_subcommand("verify");
    add_common(verify, false);
    verify->add_option("--cert", o.cert, "certificate JSON file")->required();
  }

  CLI::App* oracle = app.add_subcommand("oracle", "rank bracket via ALS");
  add_common(oracle, true);
  oracle->add_option("--rmax", o.rmax, "max rank to try");
  oracle->add_option("--restarts", o.restarts, "ALS restarts per rank");

  CLI::App* selftest = app.add_subcommand("selftest",
                                          "determinant identity sweep");
  add_common(selftest, false);
  selftest->add_option("--n", o.n, "slice size");
  selftest->add_option("--count", o.count, "number of random tensors");
  selftest->add_option("--field", o.field, "real | complex")
      ->check(CLI::IsMember({"real", "complex"}));

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << "\n";
    return 3;
  }

  TolerancePolicy pol;
  if (!o.tol_config.empty())
    pol = policy_from_json(json::parse(read_file(o.tol_config)));

  const auto t0 = std::chrono::steady_clock::now();
  json report;
  json results;

  CLI::App* sub = app.get_subcommands().front();
  std::string command = sub->get_name();
  CLI::App* leaf = sub;
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    command += " " + leaf->get_name();
  }

  auto with_tensor = [&](auto&& fn) {
    const std::string raw = read_file(o.input);
    const json jt = json::parse(raw);
    report["input"] = input_digest(jt, raw);
    std::visit([&](const auto& T) { results = fn(T); },
               tensor_variant_from_json(jt));
  };

  const std::string name = sub->get_name();
  if (name == "bound") {
    with_tensor([&](const auto& T) { return do_bound(T, o, pol); });
  } else if (name == "odeco") {
    const bool dec = leaf->get_name() == "decompose";
    with_tensor([&](const auto& T) { return do_odeco(T, dec, o, pol); });
  } else if (name == "ind") {
    const bool dec = leaf->get_name() == "decompose";
    with_tensor([&](const auto& T) { return do_ind(T, dec, o, pol); });
  } else if (name == "embed") {
    const std::string kind = leaf->get_name();
    with_tensor([&](const auto& T) { return do_embed(T, kind, o, pol); });
  } else if (name == "certify") {
    const bool ortho = sub->get_subcommands().front()->get_name() == "ortho";
    if (leaf->get_name() == "build") {
      with_tensor([&](const auto& T) { return do_certify_build(T, ortho, o, pol); });
    } else {
      const std::string raw = read_file(o.cert);
      const json jc = json::parse(raw);
      report["input"] = json{{"checksum", fnv1a_hex(raw)},
                             {"kind", jc.value("kind", "")}};
      const std::string f = jc.value("tensor", json::object()).value("field", "real");
      results = f == "complex" ? do_certify_verify<Complex>(jc, o, pol)
                               : do_certify_verify<double>(jc, o, pol);
    }
  } else if (name == "oracle") {
    with_tensor([&](const auto& T) { return do_oracle(T, o, pol); });
  } else {  // selftest
    results = o.field == "complex" ? do_selftest<Complex>(o, pol)
                                   : do_selftest<double>(o, pol);
  }

  report["command"] = command;
  report["policy"] = policy_to_json(pol);
  report["seed"] = o.seed;
  report["results"] = results;
  if (o.timing) {
    const auto dt = std::chrono::steady_clock::now() - t0;
    report["wall_time_ms"] =
        std::chrono::duration<double, std::milli>(dt).count();
  }
  out << report.dump(2) << "\n";

  if (name == "selftest" && !results.value("pass", false)) return 2;
  return 0;
}

}  // namespace
}  // namespace tenrank

namespace tenrank {

CliResult run_cli(const std::vector<std::string>& args) {
  CliResult res;
  std::ostringstream out, err;
  try {
    res.code = dispatch(args, out, err);
  } catch (const json::exception& e) {
    err << json{{"type", "json"}, {"error", e.what()}}.dump(2) << "\n";
    res.code = 3;
  } catch (const IoError& e) {
    err << json{{"type", "io"}, {"error", e.what()}}.dump(2) << "\n";
    res.code = 3;
  } catch (const PreconditionError& e) {
    err << json{{"type", "precondition"}, {"error", e.what()}}.dump(2) << "\n";
    res.code = 2;
  } catch (const Error& e) {
    err << json{{"type", "numerical"}, {"error", e.what()}}.dump(2) << "\n";
    res.code = 2;
  } catch (const std::exception& e) {
    err << json{{"type", "internal"}, {"error", e.what()}}.dump(2) << "\n";
    res.code = 2;
  }
  res.out = out.str();
  res.err = err.str();
  return res;
}

}  // namespace tenrank
