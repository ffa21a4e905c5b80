"""
Compact letter display by insert-and-absorb: labels share a letter exactly when
their adjusted p-value is at least alpha.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
import re
import string

from .types import LetterGroups, PairwiseMatrix

logger = logging.getLogger(__name__)

ALPHABET = string.ascii_uppercase + string.ascii_lowercase
LETTER_TOKEN = re.compile(r"[A-Za-z]\d*")


def letter_name(index: int) -> str:
    """A..Z, a..z, then the alphabet again with a numeric suffix (A1, B1, ..., z1, A2, ...)."""
    cycle, pos = divmod(index, len(ALPHABET))
    return ALPHABET[pos] + (str(cycle) if cycle else "")


def split_letters(letters: str) -> tuple[str, ...]:
    """Inverse of concatenating letter names: "AB1c" -> ("A", "B1", "c")."""
    return tuple(LETTER_TOKEN.findall(letters))


def share_letter(a: str, b: str) -> bool:
    return bool(set(split_letters(a)) & set(split_letters(b)))


def _absorb(columns: list[frozenset[int]]) -> list[frozenset[int]]:
    unique = list(dict.fromkeys(columns))
    return [c for c in unique if not any(c < other for other in unique)]


def compact_letter_display(matrix: PairwiseMatrix, alpha: float = 0.05) -> LetterGroups:
    """
    Groups are ordered by mean (descending, ties by input order) so the best group gets "A".
    Every significant pair splits each column holding both; columns contained in another
    column are then absorbed.
    """
    k = len(matrix.labels)
    order = sorted(range(k), key=lambda i: (-matrix.means[i], i))
    position = {label_idx: pos for pos, label_idx in enumerate(order)}

    columns: list[frozenset[int]] = [frozenset(range(k))]
    for a in range(k):
        for b in range(a + 1, k):
            if matrix.p_adjusted[order[a], order[b]] >= alpha:
                continue
            split: list[frozenset[int]] = []
            for col in columns:
                if a in col and b in col:
                    split.extend((col - {a}, col - {b}))
                else:
                    split.append(col)
            columns = _absorb([c for c in split if c])

    columns.sort(key=lambda c: sorted(c))
    letters: LetterGroups = {}
    for label_idx, label in enumerate(matrix.labels):
        pos = position[label_idx]
        letters[label] = "".join(letter_name(j) for j, col in enumerate(columns) if pos in col)
    logger.debug(f"🔤 {len(columns)} letters for {k} groups ({matrix.method}).")
    return letters


def all_same_letter(labels, letter: str = "A") -> LetterGroups:
    return {label: letter for label in labels}


def letters_consistent(matrix: PairwiseMatrix, letters: LetterGroups, alpha: float = 0.05) -> bool:
    """True when shared letters coincide exactly with non-significant pairs."""
    labels = matrix.labels
    for i, a in enumerate(labels):
        for b in labels[i + 1 :]:
            shares = share_letter(letters[a], letters[b])
            if shares != (matrix.p(a, b) >= alpha):
                return False
    return True
