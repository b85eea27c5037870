"""Stopword heuristic for ads that carry no language tag.

An ad is assigned to the language whose stopword list it hits most, with at
least two distinct hits required and strict-majority wins; anything else is
"unknown". Lists are ~50 high-frequency function words per language.
"""

from __future__ import annotations

from .textproc import tokenize

PT_STOPWORDS = frozenset(
    """o a os as um uma uns umas de do da dos das em no na nos nas por para
    com sem sobre e ou mas que se não sim é são foi ser está estão ao aos à
    às seu sua seus suas ele ela eles elas você nós já também muito mais
    isso essa esse como quando pelo pela""".split()
)

EN_STOPWORDS = frozenset(
    """the a an of in on at by for with without and or but that this these
    those is are was were be been being to from as it its he she they them
    his her their we us our you your i my me not no yes do does did have has
    had will would can could about into than then when there here what
    which""".split()
)

ES_STOPWORDS = frozenset(
    """el la los las un una unos unas de del en por para con sin sobre y o
    pero que si no sí es son fue ser está están al a su sus él ella ellos
    ellas usted ya también muy más eso esa ese como cuando donde porque
    entre hasta desde todo""".split()
)

_LISTS: dict[str, frozenset[str]] = {
    "pt": PT_STOPWORDS,
    "en": EN_STOPWORDS,
    "es": ES_STOPWORDS,
}

MIN_HITS = 2


def classify_language(text: str) -> str:
    """Return "pt", "en", "es", or "unknown" for untagged ad text."""
    tokens = set(tokenize(text))
    hits = {lang: len(tokens & words) for lang, words in _LISTS.items()}
    best = max(hits.values())
    if best < MIN_HITS:
        return "unknown"
    winners = [lang for lang, n in hits.items() if n == best]
    # A tie between languages is treated as unclassifiable.
    return winners[0] if len(winners) == 1 else "unknown"
