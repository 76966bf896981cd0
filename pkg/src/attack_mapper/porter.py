"""Porter stemmer, classic 1980 rule set.

Implemented in-repo so the token pipeline is pinned: no external NLP
dependency, no behavioral drift between library versions. Operates on
lowercase ASCII words; tokens containing digits pass through untouched
by the suffix rules that do not match them.
"""


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in "aeiou":
        return False
    if ch == "y":
        # y is a vowel when preceded by a consonant, a consonant otherwise
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel-to-consonant transitions: the m in [C](VC)^m[V]."""
    flags = [_is_consonant(stem, i) for i in range(len(stem))]
    m = 0
    for i in range(1, len(flags)):
        if flags[i] and not flags[i - 1]:
            m += 1
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    n = len(word)
    return (
        _is_consonant(word, n - 3)
        and not _is_consonant(word, n - 2)
        and _is_consonant(word, n - 1)
        and word[-1] not in "wxy"
    )


def _step1a(w: str) -> str:
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies"):
        return w[:-2]
    if w.endswith("ss"):
        return w
    if w.endswith("s"):
        return w[:-1]
    return w


def _step1b_cleanup(w: str) -> str:
    if w.endswith(("at", "bl", "iz")):
        return w + "e"
    if _ends_double_consonant(w) and w[-1] not in "lsz":
        return w[:-1]
    if _measure(w) == 1 and _ends_cvc(w):
        return w + "e"
    return w


def _step1b(w: str) -> str:
    if w.endswith("eed"):
        if _measure(w[:-3]) > 0:
            return w[:-1]
        return w
    if w.endswith("ed") and _has_vowel(w[:-2]):
        return _step1b_cleanup(w[:-2])
    if w.endswith("ing") and _has_vowel(w[:-3]):
        return _step1b_cleanup(w[:-3])
    return w


def _step1c(w: str) -> str:
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


_STEP2 = (
    ("ational", "ate"),
    ("ization", "ize"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("tional", "tion"),
    ("biliti", "ble"),
    ("entli", "ent"),
    ("ousli", "ous"),
    ("ation", "ate"),
    ("alism", "al"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("ator", "ate"),
    ("eli", "e"),
)

_STEP3 = (
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ness", ""),
    ("ful", ""),
)

_STEP4 = (
    "ement",
    "ance",
    "ence",
    "able",
    "ible",
    "ment",
    "ant",
    "ent",
    "ion",
    "ism",
    "ate",
    "iti",
    "ous",
    "ive",
    "ize",
    "al",
    "er",
    "ic",
    "ou",
)


def _longest_rule(w: str, rules) -> tuple:
    """Pick the longest matching suffix; only that rule's condition is tried."""
    best = None
    for rule in rules:
        suffix = rule[0] if isinstance(rule, tuple) else rule
        if w.endswith(suffix):
            if best is None or len(suffix) > len(best[0] if isinstance(best, tuple) else best):
                best = rule
    return best


def _step2(w: str) -> str:
    rule = _longest_rule(w, _STEP2)
    if rule is None:
        return w
    suffix, repl = rule
    stem = w[: -len(suffix)]
    if _measure(stem) > 0:
        return stem + repl
    return w


def _step3(w: str) -> str:
    rule = _longest_rule(w, _STEP3)
    if rule is None:
        return w
    suffix, repl = rule
    stem = w[: -len(suffix)]
    if _measure(stem) > 0:
        return stem + repl
    return w


def _step4(w: str) -> str:
    rule = _longest_rule(w, _STEP4)
    if rule is None:
        return w
    stem = w[: -len(rule)]
    if _measure(stem) > 1:
        if rule == "ion" and not stem.endswith(("s", "t")):
            return w
        return stem
    return w


def _step5(w: str) -> str:
    if w.endswith("e"):
        stem = w[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            w = stem
    if _measure(w) > 1 and _ends_double_consonant(w) and w[-1] == "l":
        w = w[:-1]
    return w


def stem(word: str) -> str:
    """Stem a single lowercase word."""
    if len(word) <= 2:
        return word
    w = _step1a(word)
    w = _step1b(w)
    w = _step1c(w)
    w = _step2(w)
    w = _step3(w)
    w = _step4(w)
    w = _step5(w)
    return w
