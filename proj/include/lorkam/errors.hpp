#pragma once

#include <stdexcept>
#include <string>

namespace lorkam {

/// Base of every library error. `category()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  enum class Category { Domain, Convergence, Usage };

  Error(Category cat, const std::string& what) : std::runtime_error(what), category_(cat) {}
  [[nodiscard]] Category category() const { return category_; }

 private:
  Category category_;
};

#define LORKAM_DEFINE_ERROR(Name, Cat)                                      \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(Category::Cat, what) {}  \
  };

LORKAM_DEFINE_ERROR(DomainError, Domain)
LORKAM_DEFINE_ERROR(NotTimelike, Domain)
LORKAM_DEFINE_ERROR(NotCausallyRelated, Domain)
LORKAM_DEFINE_ERROR(NotChronological, Domain)
LORKAM_DEFINE_ERROR(InAubry, Domain)
LORKAM_DEFINE_ERROR(ConfigError, Usage)
LORKAM_DEFINE_ERROR(StepFailure, Convergence)
LORKAM_DEFINE_ERROR(ConvergenceFailure, Convergence)
LORKAM_DEFINE_ERROR(WindingBoundExceeded, Convergence)
LORKAM_DEFINE_ERROR(ClassificationGap, Convergence)
LORKAM_DEFINE_ERROR(SearchBoundaryHit, Convergence)
LORKAM_DEFINE_ERROR(NUCheckFailed, Convergence)
LORKAM_DEFINE_ERROR(InconsistentCut, Convergence)
LORKAM_DEFINE_ERROR(SafetyBoundHit, Convergence)

#undef LORKAM_DEFINE_ERROR

/// The geodesic's maximal domain ends at affine parameter `t_reach`.
class DomainExceeded : public Error {
 public:
  DomainExceeded(double t_reach, const std::string& what)
      : Error(Category::Domain, what), t_reach_(t_reach) {}
  [[nodiscard]] double t_reach() const { return t_reach_; }

 private:
  double t_reach_;
};

}  // namespace lorkam
