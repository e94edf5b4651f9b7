#pragma once

#include <string>
#include <vector>

namespace iterag::eval {

/// Version tag for the normalization below, echoed in every report so scores
/// are only ever compared across identical normalizations.
inline constexpr const char* kNormalizationVersion = "v1";

/// Canonical answer tokens: ASCII lowercase, every non-alphanumeric byte
/// becomes a separator, articles (a, an, the) are dropped.
std::vector<std::string> normalize_answer(const std::string& text);

/// 1 when the normalized prediction equals any gold answer's normalized token
/// sequence, else 0.
int score_em(const std::string& prediction, const std::vector<std::string>& gold_answers);

/// Best token-bag F1 against any gold answer. Both sides empty scores 1, one
/// side empty scores 0, zero overlap scores 0.
double score_f1(const std::string& prediction, const std::vector<std::string>& gold_answers);

/// 1 when any gold answer's normalized token sequence occurs contiguously
/// inside the normalized prediction, else 0.
int score_acc(const std::string& prediction, const std::vector<std::string>& gold_answers);

} // namespace iterag::eval
