#pragma once

#include <string>
#include <vector>

// Hand-checked negation fixtures. Each case records the normalized sentence
// going in, the exact token stream after fusion, and the stream after the
// residual-cue sweep (bundled lexicon and stoplist, window = 5). Traced by
// hand against the scope rules; do not regenerate mechanically.
struct NegationCase {
  const char* name;
  std::vector<std::string> input;
  std::vector<std::string> fused;
  std::vector<std::string> swept;
};

inline const std::vector<NegationCase>& negation_cases() {
  static const std::vector<NegationCase> cases = {
      {"bare no, short scope",
       {"no", "focal", "consolidation"},
       {"no_focal_consolidation"},
       {"no_focal_consolidation"}},

      {"bare no, three-token scope",
       {"no", "acute", "cardiopulmonary", "process"},
       {"no_acute_cardiopulmonary_process"},
       {"no_acute_cardiopulmonary_process"}},

      {"termination consumes the conjunction",
       {"no", "significant", "interval", "change", "but", "mild", "edema"},
       {"no_significant_interval_change", "mild", "edema"},
       {"no_significant_interval_change", "mild", "edema"}},

      {"disjunction stays inside the scope",
       {"no", "pleural", "effusion", "or", "pneumothorax"},
       {"no_pleural_effusion_or_pneumothorax"},
       {"no_pleural_effusion_or_pneumothorax"}},

      {"forward window caps at five tokens",
       {"no", "very", "large", "right", "sided", "pleural", "effusion"},
       {"no_very_large_right_sided_pleural", "effusion"},
       {"no_very_large_right_sided_pleural", "effusion"}},

      {"pseudo-negation: no change",
       {"no", "change", "in", "edema"},
       {"no", "change", "in", "edema"},
       {"in", "edema"}},

      {"pseudo-negation: no interval change",
       {"no", "interval", "change", "in", "effusion"},
       {"no", "interval", "change", "in", "effusion"},
       {"interval", "in", "effusion"}},

      {"pseudo-negation: gram negative",
       {"gram", "negative", "rods"},
       {"gram", "negative", "rods"},
       {"gram", "negative", "rods"}},

      {"multi-word trigger is kept then swept",
       {"no", "evidence", "of", "pneumonia"},
       {"no", "evidence", "of", "no_pneumonia"},
       {"no_pneumonia"}},

      {"four-token trigger",
       {"no", "new", "evidence", "of", "hemorrhage"},
       {"no", "new", "evidence", "of", "no_hemorrhage"},
       {"new", "no_hemorrhage"}},

      {"without evidence of",
       {"without", "evidence", "of", "acute", "fracture"},
       {"without", "evidence", "of", "no_acute_fracture"},
       {"no_acute_fracture"}},

      {"negative for",
       {"negative", "for", "pneumonia"},
       {"negative", "for", "no_pneumonia"},
       {"negative", "no_pneumonia"}},

      {"denies",
       {"denies", "chest", "pain"},
       {"denies", "no_chest_pain"},
       {"denies", "no_chest_pain"}},

      {"cannot see",
       {"cannot", "see", "pneumothorax"},
       {"cannot", "see", "no_pneumothorax"},
       {"no_pneumothorax"}},

      {"absence of",
       {"absence", "of", "fever"},
       {"absence", "of", "no_fever"},
       {"absence", "no_fever"}},

      {"function words clipped from the scope tail",
       {"no", "evidence", "of", "pneumonia", "in", "the"},
       {"no", "evidence", "of", "no_pneumonia"},
       {"no_pneumonia"}},

      {"empty scope leaves the trigger alone",
       {"no", "but", "edema"},
       {"no", "but", "edema"},
       {"edema"}},

      {"second trigger ends the first scope",
       {"no", "pneumonia", "no", "effusion"},
       {"no_pneumonia", "no_effusion"},
       {"no_pneumonia", "no_effusion"}},

      {"post-negation: has resolved",
       {"pneumothorax", "has", "resolved"},
       {"no_pneumothorax", "has", "resolved"},
       {"no_pneumothorax", "resolved"}},

      {"post-negation over a multi-token scope",
       {"right", "pleural", "effusion", "has", "resolved"},
       {"no_right_pleural_effusion", "has", "resolved"},
       {"no_right_pleural_effusion", "resolved"}},

      {"termination blocks the backward scope",
       {"edema", "but", "effusion", "unlikely"},
       {"edema", "but", "no_effusion", "unlikely"},
       {"edema", "no_effusion", "unlikely"}},

      {"post-negation: was ruled out",
       {"pneumothorax", "was", "ruled", "out"},
       {"no_pneumothorax", "was", "ruled", "out"},
       {"no_pneumothorax", "ruled", "out"}},

      {"backward window caps at five tokens",
       {"clear", "lungs", "heart", "mediastinum", "contours", "effusion",
        "free"},
       {"clear", "no_lungs_heart_mediastinum_contours_effusion", "free"},
       {"clear", "no_lungs_heart_mediastinum_contours_effusion", "free"}},

      {"pseudo-negation: not certain if",
       {"not", "certain", "if", "this", "is", "real"},
       {"not", "certain", "if", "this", "is", "real"},
       {"certain", "this", "real"}},

      {"not demonstrate",
       {"does", "not", "demonstrate", "pneumonia"},
       {"does", "not", "demonstrate", "no_pneumonia"},
       {"does", "demonstrate", "no_pneumonia"}},

      {"pseudo-negation: no further",
       {"no", "further", "intervention"},
       {"no", "further", "intervention"},
       {"further", "intervention"}},

      {"no triggers at all",
       {"mild", "cardiomegaly", "stable"},
       {"mild", "cardiomegaly", "stable"},
       {"mild", "cardiomegaly", "stable"}},

      {"trigger at sentence end",
       {"pneumonia", "no"},
       {"pneumonia", "no"},
       {"pneumonia"}},

      {"never developed",
       {"never", "developed", "effusion"},
       {"never", "developed", "no_effusion"},
       {"never", "developed", "no_effusion"}},

      {"which terminates a forward scope",
       {"no", "effusion", "which", "was", "seen", "previously"},
       {"no_effusion", "was", "seen", "previously"},
       {"no_effusion", "seen", "previously"}},
  };
  return cases;
}
