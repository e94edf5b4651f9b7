#include "iterag/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "iterag/error.hpp"

namespace iterag::eval {

std::vector<std::string> normalize_answer(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty() && current != "a" && current != "an" && current != "the") {
            tokens.push_back(current);
        }
        current.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

namespace {

void check_golds(const std::vector<std::string>& gold_answers) {
    if (gold_answers.empty()) {
        throw ContractError("scoring requires at least one gold answer");
    }
}

double bag_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.empty() && gold.empty()) {
        return 1.0;
    }
    if (pred.empty() || gold.empty()) {
        return 0.0;
    }
    std::map<std::string, int> gold_counts;
    for (const auto& token : gold) {
        ++gold_counts[token];
    }
    int overlap = 0;
    for (const auto& token : pred) {
        auto it = gold_counts.find(token);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) {
        return 0.0;
    }
    double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

bool contains_contiguous(const std::vector<std::string>& haystack,
                         const std::vector<std::string>& needle) {
    if (needle.empty()) {
        return true;
    }
    if (needle.size() > haystack.size()) {
        return false;
    }
    return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
           haystack.end();
}

} // namespace

int score_em(const std::string& prediction, const std::vector<std::string>& gold_answers) {
    check_golds(gold_answers);
    auto pred = normalize_answer(prediction);
    for (const auto& gold : gold_answers) {
        if (pred == normalize_answer(gold)) {
            return 1;
        }
    }
    return 0;
}

double score_f1(const std::string& prediction, const std::vector<std::string>& gold_answers) {
    check_golds(gold_answers);
    auto pred = normalize_answer(prediction);
    double best = 0.0;
    for (const auto& gold : gold_answers) {
        best = std::max(best, bag_f1(pred, normalize_answer(gold)));
    }
    return best;
}

int score_acc(const std::string& prediction, const std::vector<std::string>& gold_answers) {
    check_golds(gold_answers);
    auto pred = normalize_answer(prediction);
    for (const auto& gold : gold_answers) {
        if (contains_contiguous(pred, normalize_answer(gold))) {
            return 1;
        }
    }
    return 0;
}

} // namespace iterag::eval
