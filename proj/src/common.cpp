#include "traceforms/common.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace traceforms {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::MassNotPD: return "MassNotPD";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SizeLimit: return "SizeLimit";
    case ErrorCode::SingularKernelBlock: return "SingularKernelBlock";
    case ErrorCode::SaddleSingular: return "SaddleSingular";
    case ErrorCode::PathUnavailable: return "PathUnavailable";
    case ErrorCode::NoDirectSum: return "NoDirectSum";
    case ErrorCode::NotSurjective: return "NotSurjective";
    case ErrorCode::NonDiagonalMass: return "NonDiagonalMass";
    case ErrorCode::NonDiagonalWeight: return "NonDiagonalWeight";
    case ErrorCode::NonPositiveLambda: return "NonPositiveLambda";
    case ErrorCode::GeometryInvalid: return "GeometryInvalid";
    case ErrorCode::ScheduleExhausted: return "ScheduleExhausted";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::InternalCheckFailed: return "InternalCheckFailed";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

double relative_asymmetry(const Matrix& X) {
  const double scale = X.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (X - X.transpose()).cwiseAbs().maxCoeff() / scale;
}

double spectral_norm_sym(const Matrix& S) {
  if (S.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double relative_gap(const Matrix& X, const Matrix& Y) {
  const double denom = std::max(Y.norm(), 1e-300);
  return (X - Y).norm() / denom;
}

int thread_count() {
  int n = 0;
  if (const char* env = std::getenv("TRACEFORMS_THREADS")) {
    n = std::atoi(env);
  }
  if (n <= 0) {
    n = static_cast<int>(std::thread::hardware_concurrency());
  }
  return std::max(1, n);
}

void parallel_for(Index n, const std::function<void(Index)>& fn) {
  const int workers = std::min<Index>(thread_count(), n);
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (Index i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over the combined word
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace traceforms
