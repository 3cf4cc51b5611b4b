"""Table-driven verb lemmatizer.

Inflections of the catalog predicates are listed explicitly; anything else
falls through to a handful of English suffix rules, which is enough to keep
non-catalog verbs (``schedules`` -> ``schedule``) out of the catalog.
"""

from __future__ import annotations

import re

# lemma -> (3rd person singular, past / participle, gerund); extra spellings below
INFLECTIONS: dict[str, tuple[str, str, str]] = {
    "decode": ("decodes", "decoded", "decoding"),
    "encode": ("encodes", "encoded", "encoding"),
    "verify": ("verifies", "verified", "verifying"),
    "access": ("accesses", "accessed", "accessing"),
    "reestablish": ("reestablishes", "reestablished", "reestablishing"),
    "count": ("counts", "counted", "counting"),
    "build": ("builds", "built", "building"),
    "complete": ("completes", "completed", "completing"),
    "append": ("appends", "appended", "appending"),
    "belong": ("belongs", "belonged", "belonging"),
    "store": ("stores", "stored", "storing"),
    "contain": ("contains", "contained", "containing"),
    "include": ("includes", "included", "including"),
    "combine": ("combines", "combined", "combining"),
    "imply": ("implies", "implied", "implying"),
    "establish": ("establishes", "established", "establishing"),
    "modify": ("modifies", "modified", "modifying"),
    "denote": ("denotes", "denoted", "denoting"),
    "utilize": ("utilizes", "utilized", "utilizing"),
    "set": ("sets", "set", "setting"),
    "change": ("changes", "changed", "changing"),
    "define": ("defines", "defined", "defining"),
    "=": ("=", "=", "="),
}

_EXTRA_FORMS = {
    "re-establish": "reestablish",
    "re-establishes": "reestablish",
    "re-established": "reestablish",
    "re-establishing": "reestablish",
    "utilise": "utilize",
    "utilises": "utilize",
    "utilised": "utilize",
    "utilising": "utilize",
    "builded": "build",
}

FORM_TO_LEMMA: dict[str, str] = {}
for _lemma, _forms in INFLECTIONS.items():
    FORM_TO_LEMMA[_lemma] = _lemma
    for _form in _forms:
        FORM_TO_LEMMA.setdefault(_form, _lemma)
FORM_TO_LEMMA.update(_EXTRA_FORMS)

_IRREGULAR = {
    "is": "be", "are": "be", "was": "be", "were": "be", "been": "be", "being": "be",
    "has": "have", "had": "have", "having": "have",
    "does": "do", "did": "do", "done": "do",
    "sent": "send", "made": "make", "took": "take", "taken": "take",
    "gave": "give", "given": "give", "got": "get", "kept": "keep",
}

_SIBILANT_ES = re.compile(r"(ss|sh|ch|x|z)es$")
# stems that lost a silent e before -ed / -ing (schedul-ed, configur-ing)
_E_DROPPING = ("ul", "ur", "at", "iz", "is", "ov", "ag", "iv", "uc", "ar")


def _suffix_rules(word: str) -> str:
    if len(word) <= 3:
        return word
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if _SIBILANT_ES.search(word):
        return word[:-2]
    if word.endswith("s") and not word.endswith("ss"):
        return word[:-1]
    if word.endswith("ied"):
        return word[:-3] + "y"
    for suffix in ("ed", "ing"):
        if word.endswith(suffix) and len(word) > len(suffix) + 2:
            stem = word[: -len(suffix)]
            if stem[-1] == stem[-2] and stem[-1] not in "ls":
                return stem[:-1]
            if stem.endswith(_E_DROPPING):
                return stem + "e"
            return stem
    return word


def lemmatize(word: str) -> str:
    """Lowercase lemma of a verb form."""
    w = word.strip().lower()
    if w in FORM_TO_LEMMA:
        return FORM_TO_LEMMA[w]
    if w in _IRREGULAR:
        return _IRREGULAR[w]
    return _suffix_rules(w)
