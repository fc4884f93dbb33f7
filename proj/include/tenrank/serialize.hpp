#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tenrank/bounds.hpp"
#include "tenrank/embed.hpp"
#include "tenrank/ind.hpp"
#include "tenrank/oracle.hpp"
#include "tenrank/ortho.hpp"
#include "tenrank/tensor.hpp"
#include "tenrank/tolerance.hpp"

namespace tenrank {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Scalars: reals as numbers, complex values as [re, im].

inline json scalar_to_json(double x) { return json(x); }
inline json scalar_to_json(const Complex& z) {
  return json::array({z.real(), z.imag()});
}

template <class S>
S scalar_from_json(const json& j);

template <>
inline double scalar_from_json<double>(const json& j) {
  if (!j.is_number())
    throw PreconditionError("expected a real number entry");
  return j.get<double>();
}

template <>
inline Complex scalar_from_json<Complex>(const json& j) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  throw PreconditionError("expected a complex entry [re, im]");
}

template <class S>
json vector_to_json(const VectorX<S>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(scalar_to_json(v(i)));
  return a;
}

template <class S>
VectorX<S> vector_from_json(const json& j) {
  if (!j.is_array()) throw PreconditionError("expected a vector array");
  VectorX<S> v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v(i) = scalar_from_json<S>(j[i]);
  return v;
}

template <class S>
json matrix_to_json(const MatrixX<S>& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      row.push_back(scalar_to_json(M(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Tensors: {"field", "shape": [m,n,p], "entries": nested row-major,
// "symmetric"}.

template <class S>
json tensor_to_json(const Tensor3<S>& T) {
  json entries = json::array();
  for (Eigen::Index i = 0; i < T.dim0(); ++i) {
    json plane = json::array();
    for (Eigen::Index j = 0; j < T.dim1(); ++j) {
      json fiber = json::array();
      for (Eigen::Index k = 0; k < T.dim2(); ++k)
        fiber.push_back(scalar_to_json(T(i, j, k)));
      plane.push_back(std::move(fiber));
    }
    entries.push_back(std::move(plane));
  }
  return json{{"field", field_name(scalar_traits<S>::field)},
              {"shape", {T.dim0(), T.dim1(), T.dim2()}},
              {"entries", std::move(entries)},
              {"symmetric", T.symmetric()}};
}

template <class S>
Tensor3<S> tensor_from_json(const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("entries"))
    throw PreconditionError("tensor JSON needs \"shape\" and \"entries\"");
  const auto& sh = j.at("shape");
  if (!sh.is_array() || sh.size() != 3)
    throw PreconditionError("tensor \"shape\" must have 3 entries");
  const Eigen::Index m = sh[0].get<Eigen::Index>();
  const Eigen::Index n = sh[1].get<Eigen::Index>();
  const Eigen::Index p = sh[2].get<Eigen::Index>();
  Tensor3<S> T(m, n, p);
  const auto& e = j.at("entries");
  if (!e.is_array() || static_cast<Eigen::Index>(e.size()) != m)
    throw PreconditionError("tensor \"entries\" outer size mismatch");
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& plane = e[i];
    if (!plane.is_array() || static_cast<Eigen::Index>(plane.size()) != n)
      throw PreconditionError("tensor \"entries\" middle size mismatch");
    for (Eigen::Index jj = 0; jj < n; ++jj) {
      const auto& fiber = plane[jj];
      if (!fiber.is_array() || static_cast<Eigen::Index>(fiber.size()) != p)
        throw PreconditionError("tensor \"entries\" inner size mismatch");
      for (Eigen::Index k = 0; k < p; ++k)
        T(i, jj, k) = scalar_from_json<S>(fiber[k]);
    }
  }
  if (j.value("symmetric", false)) T.mark_symmetric();
  return T;
}

/// Runtime field dispatch for CLI inputs.
using TensorVariant = std::variant<Tensor3<double>, Tensor3<Complex>>;

inline Field field_from_json(const json& j) {
  const std::string f = j.value("field", "real");
  if (f == "real") return Field::Real;
  if (f == "complex") return Field::Complex;
  throw PreconditionError("unknown field: " + f);
}

inline TensorVariant tensor_variant_from_json(const json& j) {
  if (field_from_json(j) == Field::Real)
    return tensor_from_json<double>(j);
  return tensor_from_json<Complex>(j);
}

// ---------------------------------------------------------------------------
// Decompositions: {"terms": [{"u", "v", "w"}]}.

template <class S>
json decomposition_to_json(const Decomposition<S>& D) {
  json terms = json::array();
  for (const auto& t : D.terms) {
    json term{{"u", vector_to_json(t.u)},
              {"v", vector_to_json(t.v)},
              {"w", vector_to_json(t.w)}};
    if (t.padding) term["padding"] = true;
    terms.push_back(std::move(term));
  }
  return json{{"field", field_name(scalar_traits<S>::field)},
              {"terms", std::move(terms)}};
}

template <class S>
Decomposition<S> decomposition_from_json(const json& j) {
  if (!j.is_object() || !j.contains("terms"))
    throw PreconditionError("decomposition JSON needs \"terms\"");
  Decomposition<S> D;
  for (const auto& t : j.at("terms")) {
    D.terms.push_back({vector_from_json<S>(t.at("u")),
                       vector_from_json<S>(t.at("v")),
                       vector_from_json<S>(t.at("w")),
                       t.value("padding", false)});
  }
  return D;
}

// ---------------------------------------------------------------------------
// Policy, reports, certificates, embeddings, brackets.

inline json policy_to_json(const TolerancePolicy& pol) {
  return json{{"rank_rel_tol", pol.rank_rel_tol},
              {"eig_cluster_tol", pol.eig_cluster_tol},
              {"real_axis_tol", pol.real_axis_tol},
              {"residual_tol", pol.residual_tol},
              {"span_trials", pol.span_trials},
              {"als_max_iters", pol.als_max_iters}};
}

inline TolerancePolicy policy_from_json(const json& j) {
  TolerancePolicy pol;
  pol.rank_rel_tol = j.value("rank_rel_tol", pol.rank_rel_tol);
  pol.eig_cluster_tol = j.value("eig_cluster_tol", pol.eig_cluster_tol);
  pol.real_axis_tol = j.value("real_axis_tol", pol.real_axis_tol);
  pol.residual_tol = j.value("residual_tol", pol.residual_tol);
  pol.span_trials = j.value("span_trials", pol.span_trials);
  pol.als_max_iters = j.value("als_max_iters", pol.als_max_iters);
  pol.validate();
  return pol;
}

inline json bound_report_to_json(const BoundReport& rep) {
  return json{{"value", rep.value},
              {"method", bound_method_name(rep.method)},
              {"applies_to_border_rank", rep.applies_to_border_rank},
              {"diagnostics", rep.diagnostics}};
}

inline json check_report_to_json(const CheckReport& rep) {
  return json{{"ok", rep.ok},
              {"diagnostics", rep.diagnostics},
              {"worst", rep.worst}};
}

inline json cert_checks_to_json(const std::map<std::string, CertCheck>& checks) {
  json out = json::object();
  for (const auto& [name, c] : checks)
    out[name] = json{{"pass", c.pass}, {"residual", c.residual}};
  return out;
}

template <class S>
json rank_certificate_to_json(const RankCertificate<S>& cert) {
  return json{{"kind", "ortho_rank_certificate"},
              {"tensor", tensor_to_json(cert.tensor)},
              {"supertensor", tensor_to_json(cert.supertensor)},
              {"r", cert.r},
              {"flavor", cert.flavor.name()},
              {"span_trials", cert.span_trials},
              {"seed", cert.seed},
              {"checks", cert_checks_to_json(cert.checks)}};
}

template <class S>
RankCertificate<S> rank_certificate_from_json(const json& j) {
  RankCertificate<S> cert;
  cert.tensor = tensor_from_json<S>(j.at("tensor"));
  cert.supertensor = tensor_from_json<S>(j.at("supertensor"));
  cert.r = j.at("r").get<int>();
  cert.flavor = OdecoFlavor::parse(j.at("flavor").get<std::string>());
  cert.span_trials = j.value("span_trials", 0);
  cert.seed = j.value("seed", std::uint64_t(0));
  return cert;
}

template <class S>
json ind_certificate_to_json(const IndCertificate<S>& cert) {
  return json{{"kind", "ind_rank_certificate"},
              {"tensor", tensor_to_json(cert.tensor)},
              {"supertensor", tensor_to_json(cert.supertensor)},
              {"r", cert.r},
              {"symmetric", cert.symmetric},
              {"witness_coeffs", vector_to_json(cert.witness_coeffs)},
              {"seed", cert.seed},
              {"checks", cert_checks_to_json(cert.checks)}};
}

template <class S>
IndCertificate<S> ind_certificate_from_json(const json& j) {
  IndCertificate<S> cert;
  cert.tensor = tensor_from_json<S>(j.at("tensor"));
  cert.supertensor = tensor_from_json<S>(j.at("supertensor"));
  cert.r = j.at("r").get<int>();
  cert.symmetric = j.value("symmetric", false);
  cert.witness_coeffs = vector_from_json<double>(j.at("witness_coeffs"));
  cert.seed = j.value("seed", std::uint64_t(0));
  return cert;
}

template <class S>
json embedding_to_json(const Embedding<S>& E) {
  json orig = json::array(), ext = json::array();
  for (const auto& M : E.originals) orig.push_back(matrix_to_json(M));
  for (const auto& M : E.extended) ext.push_back(matrix_to_json(M));
  return json{{"kind", "embedding"},
              {"field", field_name(scalar_traits<S>::field)},
              {"N", E.N},
              {"originals", std::move(orig)},
              {"extended", std::move(ext)},
              {"commute_residual", E.commute_residual},
              {"all_diagonalizable", E.all_diagonalizable},
              {"products_zero", E.products_zero}};
}

template <class S>
json rank_bracket_to_json(const RankBracket<S>& b) {
  json out{{"kind", "rank_bracket"},
           {"lower", b.lower},
           {"lower_method", b.lower_method},
           {"resolved", b.resolved}};
  if (b.has_upper) {
    out["upper"] = b.upper;
    out["upper_residual"] = b.upper_residual;
    out["witness"] = decomposition_to_json(b.witness);
  } else {
    out["upper"] = nullptr;
  }
  return out;
}

}  // namespace tenrank
