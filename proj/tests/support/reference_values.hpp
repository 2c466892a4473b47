#pragma once

#include <array>
#include <string>

// Published results used as frozen expectations.
namespace fixtures::reference {

struct AttackRow {
  const char* model;
  const char* dataset;
  std::size_t classes;
  double att_sr, acc_ba, acc_aa, att_dr;
};

// 1000 sampled examples per cell. HARD has four classes, MSDA three.
inline constexpr std::array<AttackRow, 6> kAttack = {{
    {"word_cnn", "hard", 4, 50.00, 32.09, 32.05, 0.04},
    {"word_cnn", "msda", 3, 30.00, 45.15, 39.31, 5.84},
    {"word_lstm", "hard", 4, 51.00, 34.82, 33.90, 0.92},
    {"word_lstm", "msda", 3, 25.00, 47.48, 41.73, 5.75},
    {"bert", "hard", 4, 51.00, 88.59, 73.90, 14.69},
    {"bert", "msda", 3, 26.00, 90.55, 63.62, 26.93},
}};

struct TransferRow {
  const char* dataset;
  const char* source;
  const char* victim;
  double acc_x, acc_xadv, delta;
};

// 245 adversarial examples per source; the diagonal is empty.
inline constexpr std::array<TransferRow, 12> kTransfer = {{
    {"hard", "word_lstm", "word_cnn", 52.65, 47.34, 5.31},
    {"hard", "bert", "word_cnn", 65.71, 34.28, 31.43},
    {"hard", "word_cnn", "word_lstm", 56.32, 43.67, 12.65},
    {"hard", "bert", "word_lstm", 60.81, 39.18, 21.63},
    {"hard", "word_cnn", "bert", 75.51, 24.48, 51.03},
    {"hard", "word_lstm", "bert", 74.28, 25.71, 48.57},
    {"msda", "word_lstm", "word_cnn", 87.34, 12.65, 74.69},
    {"msda", "bert", "word_cnn", 86.53, 13.46, 73.07},
    {"msda", "word_cnn", "word_lstm", 83.26, 16.73, 66.53},
    {"msda", "bert", "word_lstm", 82.04, 17.95, 64.09},
    {"msda", "word_cnn", "bert", 89.38, 10.61, 78.77},
    {"msda", "word_lstm", "bert", 88.16, 11.83, 76.33},
}};

struct HumanRow {
  const char* model;
  double grammar_linguist, grammar_non_linguist, grammar_overall;
  double semantic_linguist, semantic_non_linguist, semantic_overall;
};

// Four evaluators, two per group, 50 adversarial examples per model.
inline constexpr std::array<HumanRow, 3> kHuman = {{
    {"word_cnn", 92.00, 99.00, 95.50, 89.00, 87.00, 88.00},
    {"word_lstm", 94.00, 95.00, 94.50, 87.00, 86.00, 86.50},
    {"bert", 98.00, 98.00, 98.00, 91.00, 86.00, 88.50},
}};

struct DefenseRow {
  const char* dataset;
  double acc_ba, acc_aa, adversarial_training_acc;
};

inline constexpr std::array<DefenseRow, 2> kDefense = {{
    {"hard", 88.59, 73.90, 76.51},
    {"msda", 90.55, 63.62, 65.69},
}};

// Claimed minimum recovery of adversarial training.
inline constexpr double kMinRecovery = 2.00;

}  // namespace fixtures::reference
