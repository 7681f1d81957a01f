#pragma once

#include <string>

namespace synlm::testing {

/// PTB-style transcription of a tree with a WHNP object extraction and a
/// WHADVP adjunct extraction: "We make what we know how to make".
inline const std::string kWhAnnotatedTree =
    "( (S (NP-SBJ (PRP We)) (VP (VBP make) (SBAR (WHNP-1 (WP what)) (S (NP-SBJ (PRP we)) "
    "(VP (VBP know) (SBAR (WHADVP-2 (WRB how)) (S (NP-SBJ (-NONE- *PRO*)) (VP (TO to) "
    "(VP (VB make) (NP (-NONE- *T*-1)) (ADVP-MNR (-NONE- *T*-2))))))))))) )";

inline const std::string kWhStrippedTree =
    "(S (NP We) (VP make (SBAR (WHNP what) (S (NP we) (VP know (SBAR (WHADVP how) (S (VP to (VP make)))))))))";

/// Tiny grammar with recursion, used by round-trip tests.
inline const std::string kRecursiveGrammar = R"(# toy grammar with recursion
S -> NP VP # 0.9
S -> S CC S # 0.1
NP -> DT NN # 0.6
NP -> NP PP # 0.2
NP -> PRP # 0.2
VP -> VB NP # 0.5
VP -> VB # 0.2
VP -> VB SBAR # 0.3
SBAR -> that S # 1.0
PP -> IN NP # 1.0
DT -> the # 0.7
DT -> a # 0.3
NN -> dog # 0.5
NN -> cat # 0.5
PRP -> she # 1.0
VB -> saw # 0.6
VB -> said # 0.4
IN -> near # 1.0
CC -> and # 1.0
)";

}  // namespace synlm::testing
