#ifndef ICSCLUST_SPECS_HPP
#define ICSCLUST_SPECS_HPP

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icsclust/cluster.hpp"
#include "icsclust/mcd.hpp"
#include "icsclust/scatter.hpp"
#include "icsclust/simgen.hpp"

namespace icsclust {

namespace detail {

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      return out;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

inline double parse_number(std::string_view token, const std::string& context) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw parse_error(context + ": expected a number, got '" + std::string(token) + "'");
  return value;
}

inline int parse_int(std::string_view token, const std::string& context) {
  int value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw parse_error(context + ": expected an integer, got '" + std::string(token) + "'");
  return value;
}

}  // namespace detail

/// Scatter estimator grammar: cov | cov4 | mlc | mcd:A | rmcd:A | scov:B |
/// tcov:B | ucov:B | lcov:V0:B (bare tcov/ucov/scov/lcov get the defaults
/// 2 / 0.2 / 2 / cov:0.1).
struct ScatterSpec {
  enum class Kind { cov, cov4, mlc, mcd, rmcd, scov, tcov, ucov, lcov };
  Kind kind = Kind::cov;
  double param = 0.0;            // alpha or beta
  std::string lcov_v0 = "cov";   // nested estimator tag for lcov
  std::string id = "cov";
};

inline ScatterSpec parse_scatter_spec(const std::string& text) {
  const auto tokens = detail::split(text, ':');
  const std::string& name = tokens[0];
  ScatterSpec spec;
  spec.id = text;
  auto one_param = [&](double fallback, bool required) {
    if (tokens.size() == 1) {
      if (required) throw parse_error("scatter spec '" + text + "' needs a parameter");
      return fallback;
    }
    if (tokens.size() != 2) throw parse_error("scatter spec '" + text + "' has too many fields");
    return detail::parse_number(tokens[1], "scatter spec '" + text + "'");
  };
  if (name == "cov" || name == "cov4" || name == "mlc") {
    if (tokens.size() != 1) throw parse_error("scatter spec '" + text + "' takes no parameter");
    spec.kind = name == "cov"    ? ScatterSpec::Kind::cov
                : name == "cov4" ? ScatterSpec::Kind::cov4
                                 : ScatterSpec::Kind::mlc;
  } else if (name == "mcd" || name == "rmcd") {
    spec.kind = name == "mcd" ? ScatterSpec::Kind::mcd : ScatterSpec::Kind::rmcd;
    spec.param = one_param(0.0, true);
    if (!(spec.param > 0.0) || spec.param > 1.0)
      throw parse_error("scatter spec '" + text + "': alpha must be in (0, 1]");
  } else if (name == "scov" || name == "tcov" || name == "ucov") {
    spec.kind = name == "scov"   ? ScatterSpec::Kind::scov
                : name == "tcov" ? ScatterSpec::Kind::tcov
                                 : ScatterSpec::Kind::ucov;
    spec.param = one_param(name == "ucov" ? 0.2 : 2.0, false);
    if (!(spec.param > 0.0))
      throw parse_error("scatter spec '" + text + "': beta must be > 0");
  } else if (name == "lcov") {
    spec.kind = ScatterSpec::Kind::lcov;
    if (tokens.size() == 1) {
      spec.lcov_v0 = "cov";
      spec.param = 0.1;
    } else if (tokens.size() >= 3) {
      spec.lcov_v0 = tokens[1];
      for (std::size_t i = 2; i + 1 < tokens.size(); ++i) spec.lcov_v0 += ":" + tokens[i];
      spec.param = detail::parse_number(tokens.back(), "scatter spec '" + text + "'");
    } else {
      throw parse_error("scatter spec '" + text + "': expected lcov:V0:beta");
    }
    if (!(spec.param > 0.0) || spec.param > 1.0)
      throw parse_error("scatter spec '" + text + "': beta must be in (0, 1]");
  } else {
    throw parse_error("unknown scatter estimator '" + name + "'");
  }
  return spec;
}

inline ScatterEstimate compute_scatter(const Matrix& X, const ScatterSpec& spec,
                                       std::uint64_t seed) {
  switch (spec.kind) {
    case ScatterSpec::Kind::cov:
      return cov(X);
    case ScatterSpec::Kind::cov4:
      return cov4(X);
    case ScatterSpec::Kind::mlc:
      return mlc(X);
    case ScatterSpec::Kind::mcd:
      return mcd(X, spec.param, 500, seed);
    case ScatterSpec::Kind::rmcd:
      return rmcd(X, spec.param, 500, seed);
    case ScatterSpec::Kind::scov:
      return scov(X, spec.param);
    case ScatterSpec::Kind::tcov:
      return tcov(X, spec.param);
    case ScatterSpec::Kind::ucov:
      return ucov(X, spec.param);
    case ScatterSpec::Kind::lcov: {
      const ScatterSpec inner = parse_scatter_spec(spec.lcov_v0);
      if (inner.kind == ScatterSpec::Kind::lcov)
        throw parse_error("lcov cannot use lcov as its V0");
      return lcov(X, compute_scatter(X, inner, derive_seed(seed, "lcov-v0")), spec.param);
    }
  }
  throw parse_error("unreachable scatter kind");
}

/// Component selection criterion grammar: med | var | normal:LEVEL | oracle.
struct CriterionSpec {
  enum class Kind { med, var, normal, oracle };
  Kind kind = Kind::med;
  double level = 0.05;
  std::string id = "med";
};

inline CriterionSpec parse_criterion_spec(const std::string& text) {
  const auto tokens = detail::split(text, ':');
  CriterionSpec spec;
  spec.id = text;
  if (tokens[0] == "med" && tokens.size() == 1) {
    spec.kind = CriterionSpec::Kind::med;
  } else if (tokens[0] == "var" && tokens.size() == 1) {
    spec.kind = CriterionSpec::Kind::var;
  } else if (tokens[0] == "oracle" && tokens.size() == 1) {
    spec.kind = CriterionSpec::Kind::oracle;
  } else if (tokens[0] == "normal" && tokens.size() <= 2) {
    spec.kind = CriterionSpec::Kind::normal;
    if (tokens.size() == 2)
      spec.level = detail::parse_number(tokens[1], "criterion spec '" + text + "'");
    if (!(spec.level > 0.0) || !(spec.level < 1.0))
      throw parse_error("criterion spec '" + text + "': level must be in (0, 1)");
  } else {
    throw parse_error("unknown selection criterion '" + text + "'");
  }
  return spec;
}

/// Clustering method grammar: kmeans | pam | tkmeans:TRIM | gmm | gmm-noise.
struct ClustererSpec {
  enum class Kind { kmeans, pam, tkmeans, gmm, gmm_noise };
  Kind kind = Kind::kmeans;
  double trim = 0.05;
  std::string id = "kmeans";
};

inline ClustererSpec parse_clusterer_spec(const std::string& text) {
  const auto tokens = detail::split(text, ':');
  ClustererSpec spec;
  spec.id = text;
  if (tokens[0] == "kmeans" && tokens.size() == 1) {
    spec.kind = ClustererSpec::Kind::kmeans;
  } else if (tokens[0] == "pam" && tokens.size() == 1) {
    spec.kind = ClustererSpec::Kind::pam;
  } else if (tokens[0] == "gmm" && tokens.size() == 1) {
    spec.kind = ClustererSpec::Kind::gmm;
  } else if (tokens[0] == "gmm-noise" && tokens.size() == 1) {
    spec.kind = ClustererSpec::Kind::gmm_noise;
  } else if (tokens[0] == "tkmeans" && tokens.size() <= 2) {
    spec.kind = ClustererSpec::Kind::tkmeans;
    if (tokens.size() == 2)
      spec.trim = detail::parse_number(tokens[1], "clusterer spec '" + text + "'");
    if (spec.trim < 0.0 || spec.trim >= 1.0)
      throw parse_error("clusterer spec '" + text + "': trim must be in [0, 1)");
  } else {
    throw parse_error("unknown clustering method '" + text + "'");
  }
  return spec;
}

inline ClusterResult run_clusterer(const Matrix& Y, const ClustererSpec& spec, int k,
                                   std::uint64_t seed) {
  switch (spec.kind) {
    case ClustererSpec::Kind::kmeans:
      return kmeans(Y, k, 25, seed);
    case ClustererSpec::Kind::pam:
      return pam(Y, k);
    case ClustererSpec::Kind::tkmeans:
      return tkmeans(Y, k, spec.trim, 25, seed);
    case ClustererSpec::Kind::gmm:
      return gmm_em(Y, k, false, 5, seed);
    case ClustererSpec::Kind::gmm_noise:
      return gmm_em(Y, k, true, 5, seed);
  }
  throw parse_error("unreachable clusterer kind");
}

/// Data-generator grammar:
///   mix:D:W1-W2-..:deltaX[:nN]      weights in percent
///   bwheel[:dD][:nN][:s1=..][:s2=..][:eps=..]
/// either optionally composed with '+outliers:P'.
struct SettingSpec {
  enum class Kind { mixture, barrow_wheel };
  Kind kind = Kind::mixture;
  MixtureSpec mixture;
  BarrowWheelSpec wheel;
  double outlier_proportion = 0.0;
  std::string id;

  int true_clusters() const {
    const int q = (kind == Kind::mixture) ? mixture.q() : 3;
    return q;
  }
};

inline std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> weights;
  for (const auto& tok : detail::split(text, '-'))
    weights.push_back(detail::parse_number(tok, "mixture weights '" + text + "'"));
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (!(sum > 0.0)) throw parse_error("mixture weights '" + text + "' must be positive");
  for (double& w : weights) w /= sum;
  return weights;
}

inline SettingSpec parse_setting_spec(const std::string& text) {
  SettingSpec spec;
  spec.id = text;
  const auto plus = detail::split(text, '+');
  if (plus.size() > 2) throw parse_error("setting spec '" + text + "': at most one '+' part");
  if (plus.size() == 2) {
    const auto out_tokens = detail::split(plus[1], ':');
    if (out_tokens.size() != 2 || out_tokens[0] != "outliers")
      throw parse_error("setting spec '" + text + "': expected '+outliers:P'");
    spec.outlier_proportion = detail::parse_number(out_tokens[1], "setting spec '" + text + "'");
    if (spec.outlier_proportion < 0.0 || spec.outlier_proportion >= 1.0)
      throw parse_error("setting spec '" + text + "': outlier proportion must be in [0, 1)");
  }

  const auto tokens = detail::split(plus[0], ':');
  if (tokens[0] == "mix") {
    spec.kind = SettingSpec::Kind::mixture;
    if (tokens.size() < 4)
      throw parse_error("setting spec '" + text + "': expected mix:D:WEIGHTS:deltaX");
    spec.mixture.d = detail::parse_int(tokens[1], "setting spec '" + text + "'");
    spec.mixture.weights = parse_weights(tokens[2]);
    if (tokens[3].rfind("delta", 0) != 0)
      throw parse_error("setting spec '" + text + "': third field must be deltaX");
    spec.mixture.delta =
        detail::parse_number(tokens[3].substr(5), "setting spec '" + text + "'");
    spec.mixture.n = 1000;
    for (std::size_t i = 4; i < tokens.size(); ++i) {
      if (tokens[i].rfind("n", 0) == 0)
        spec.mixture.n = detail::parse_int(tokens[i].substr(1), "setting spec '" + text + "'");
      else
        throw parse_error("setting spec '" + text + "': unknown field '" + tokens[i] + "'");
    }
    spec.mixture.validate();
  } else if (tokens[0] == "bwheel") {
    spec.kind = SettingSpec::Kind::barrow_wheel;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const std::string& tok = tokens[i];
      if (tok.rfind("s1=", 0) == 0)
        spec.wheel.sigma1 = detail::parse_number(tok.substr(3), "setting '" + text + "'");
      else if (tok.rfind("s2=", 0) == 0)
        spec.wheel.sigma2 = detail::parse_number(tok.substr(3), "setting '" + text + "'");
      else if (tok.rfind("eps=", 0) == 0)
        spec.wheel.eps = detail::parse_number(tok.substr(4), "setting '" + text + "'");
      else if (tok.rfind("d", 0) == 0)
        spec.wheel.d = detail::parse_int(tok.substr(1), "setting '" + text + "'");
      else if (tok.rfind("n", 0) == 0)
        spec.wheel.n = detail::parse_int(tok.substr(1), "setting '" + text + "'");
      else
        throw parse_error("setting spec '" + text + "': unknown field '" + tok + "'");
    }
    spec.wheel.validate();
  } else {
    throw parse_error("unknown setting generator '" + tokens[0] + "'");
  }
  return spec;
}

/// Deterministic sample for a setting: generator output, then optional
/// outlier contamination on a derived stream.
inline std::pair<Matrix, Labels> generate_setting(const SettingSpec& spec, std::uint64_t seed) {
  auto data = (spec.kind == SettingSpec::Kind::mixture)
                  ? gen_mixture(spec.mixture, seed)
                  : gen_barrow_wheel(spec.wheel, seed);
  if (spec.outlier_proportion > 0.0)
    data = inject_outliers(data.first, data.second, spec.outlier_proportion,
                           derive_seed(seed, "contaminate"));
  return data;
}

/// Dimension-reduction method grammar, one entry per strategy:
///   none
///   ics V1,V2 CRITERION        (whitespace separated)
///   pca:cov:pct80 | pca:rmcd0.75:kminus1
struct MethodSpec {
  enum class Kind { none, ics, pca };
  Kind kind = Kind::none;
  ScatterSpec v1, v2;          // ics
  CriterionSpec criterion;     // ics
  ScatterSpec pca_scatter;     // pca: cov or rmcd
  bool pca_pct = true;         // pca: pct criterion vs k-1
  double pca_threshold = 0.8;  // pca pct criterion
  std::string id = "none";
};

inline MethodSpec parse_method_spec(const std::string& text) {
  MethodSpec spec;
  spec.id = text;
  // normalize whitespace-separated tokens
  std::vector<std::string> words;
  for (const auto& w : detail::split(text, ' '))
    if (!w.empty()) words.push_back(w);
  if (words.empty()) throw parse_error("empty method spec");

  if (words[0] == "none") {
    if (words.size() != 1) throw parse_error("method spec '" + text + "': none takes no fields");
    spec.kind = MethodSpec::Kind::none;
    return spec;
  }
  if (words[0] == "ics") {
    if (words.size() != 3)
      throw parse_error("method spec '" + text + "': expected 'ics V1,V2 CRITERION'");
    spec.kind = MethodSpec::Kind::ics;
    const auto pair = detail::split(words[1], ',');
    if (pair.size() != 2)
      throw parse_error("method spec '" + text + "': scatter pair must be 'V1,V2'");
    spec.v1 = parse_scatter_spec(pair[0]);
    spec.v2 = parse_scatter_spec(pair[1]);
    spec.criterion = parse_criterion_spec(words[2]);
    return spec;
  }
  if (words[0].rfind("pca:", 0) == 0) {
    if (words.size() != 1)
      throw parse_error("method spec '" + text + "': pca takes a single token");
    const auto tokens = detail::split(words[0], ':');
    if (tokens.size() != 3)
      throw parse_error("method spec '" + text + "': expected pca:SCATTER:CRITERION");
    spec.kind = MethodSpec::Kind::pca;
    if (tokens[1] == "cov") {
      spec.pca_scatter = parse_scatter_spec("cov");
    } else if (tokens[1].rfind("rmcd", 0) == 0) {
      const std::string alpha = tokens[1].substr(4);
      spec.pca_scatter = parse_scatter_spec("rmcd:" + (alpha.empty() ? "0.75" : alpha));
    } else {
      throw parse_error("method spec '" + text + "': pca scatter must be cov or rmcdALPHA");
    }
    if (tokens[2] == "kminus1") {
      spec.pca_pct = false;
    } else if (tokens[2].rfind("pct", 0) == 0) {
      spec.pca_pct = true;
      spec.pca_threshold =
          detail::parse_number(tokens[2].substr(3), "method spec '" + text + "'") / 100.0;
      if (!(spec.pca_threshold > 0.0) || spec.pca_threshold > 1.0)
        throw parse_error("method spec '" + text + "': pct threshold must be in (0, 100]");
    } else {
      throw parse_error("method spec '" + text + "': pca criterion must be pctNN or kminus1");
    }
    return spec;
  }
  throw parse_error("unknown reduction method '" + words[0] + "'");
}

}  // namespace icsclust

#endif
