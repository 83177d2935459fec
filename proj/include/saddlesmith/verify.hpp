#ifndef SADDLESMITH_VERIFY_HPP
#define SADDLESMITH_VERIFY_HPP

#include <string>
#include <vector>

namespace saddlesmith {

struct VerifyCheck {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool larger_is_better = false;
    bool pass = false;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass = true;
};

/// Runs the module invariant suites. `full` adds the expensive period-side
/// checks (roundtrip, section identity, involution antisymmetry).
VerifyReport run_verification(unsigned seed, bool full);

std::string verify_report_text(const VerifyReport& rep);

} // namespace saddlesmith

#endif
