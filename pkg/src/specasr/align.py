"""Edit-distance core: Levenshtein DP, S/D/I alignment counts, and the
left-substring split search that decides what remains to be spoken."""

from dataclasses import dataclass

from .textnorm import TokenSeq


@dataclass(frozen=True)
class EditCosts:
    """Per-operation edit costs; matches are always free."""

    substitution: int = 1
    insertion: int = 1
    deletion: int = 1

    def __post_init__(self):
        if min(self.substitution, self.insertion, self.deletion) < 1:
            raise ValueError("edit costs must be strictly positive")


UNIT_COSTS = EditCosts()


@dataclass(frozen=True)
class WerBreakdown:
    """Error counts from aligning a hypothesis against a reference.

    The convention is the usual ASR one: deletions consume reference tokens,
    insertions consume hypothesis tokens. Hence
    substitutions + deletions + matches == ref_len and
    substitutions + insertions + matches == len(hypothesis).
    Breakdowns add together, which is how corpus pooling works.
    """

    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    matches: int = 0
    ref_len: int = 0

    def __post_init__(self):
        counts = (self.substitutions, self.deletions, self.insertions,
                  self.matches, self.ref_len)
        if min(counts) < 0:
            raise ValueError("counts must be non-negative")
        if self.substitutions + self.deletions + self.matches != self.ref_len:
            raise ValueError("substitutions + deletions + matches must equal ref_len")

    @property
    def total(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self) -> float | None:
        """Error rate (may exceed 1.0). None when undefined: empty reference
        but a non-empty hypothesis. Such utterances still pool at corpus
        level through their raw counts."""
        if self.ref_len > 0:
            return self.total / self.ref_len
        return 0.0 if self.total == 0 else None

    def __add__(self, other):
        if not isinstance(other, WerBreakdown):
            return NotImplemented
        return WerBreakdown(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.matches + other.matches,
            self.ref_len + other.ref_len,
        )

    def __radd__(self, other):
        if other == 0:
            return self
        return NotImplemented

    def to_dict(self) -> dict:
        return {
            "substitutions": self.substitutions,
            "deletions": self.deletions,
            "insertions": self.insertions,
            "matches": self.matches,
            "ref_len": self.ref_len,
            "total": self.total,
        }


@dataclass(frozen=True)
class AwsedResult:
    """Outcome of the split search: the reference divides into a covered part
    ref[:v_star] and the suffix ref[v_star:] still to be produced."""

    v_star: int
    suffix: TokenSeq
    distance: int


def levenshtein(a, b, costs: EditCosts = UNIT_COSTS) -> int:
    """Minimal cost of editing sequence ``a`` into sequence ``b``.

    Deletion removes a token of ``a``, insertion adds a token of ``b``;
    symmetric whenever insertion and deletion costs agree.
    """
    sub_c, ins_c, del_c = costs.substitution, costs.insertion, costs.deletion
    prev = [j * ins_c for j in range(len(b) + 1)]
    for i in range(1, len(a) + 1):
        ai = a[i - 1]
        cur = [prev[0] + del_c]
        for j in range(1, len(b) + 1):
            best = prev[j - 1] if ai == b[j - 1] else prev[j - 1] + sub_c
            via_del = prev[j] + del_c
            if via_del < best:
                best = via_del
            via_ins = cur[j - 1] + ins_c
            if via_ins < best:
                best = via_ins
            cur.append(best)
        prev = cur
    return prev[len(b)]


def dp_last_row(hyp, ref, costs: EditCosts = UNIT_COSTS) -> list[int]:
    """Distances from ``hyp`` to every left-substring of ``ref``.

    Returns values with values[v] == levenshtein(hyp, ref[:v]) for
    v = 0..len(ref). One DP pass over ``hyp`` produces the whole row, so the
    best split point costs no more than a single distance computation; only
    two rows are ever held in memory.
    """
    sub_c, ins_c, del_c = costs.substitution, costs.insertion, costs.deletion
    row = [v * ins_c for v in range(len(ref) + 1)]
    for i in range(1, len(hyp) + 1):
        hi = hyp[i - 1]
        nxt = [row[0] + del_c]
        for v in range(1, len(ref) + 1):
            best = row[v - 1] if hi == ref[v - 1] else row[v - 1] + sub_c
            via_del = row[v] + del_c
            if via_del < best:
                best = via_del
            via_ins = nxt[v - 1] + ins_c
            if via_ins < best:
                best = via_ins
            nxt.append(best)
        row = nxt
    return row


def awsed(hyp_prefix, ref, costs: EditCosts = UNIT_COSTS) -> AwsedResult:
    """Split ``ref`` into the part covered by an errorful hypothesis prefix
    and the suffix left to speculate.

    Every left-substring ref[:v] is a candidate for what the hypothesis
    transcribed; the v minimizing the edit distance wins and the leftmost v
    wins ties, so an ambiguous alignment never shortens the target suffix.
    Either input may be empty.
    """
    row = dp_last_row(hyp_prefix, ref, costs)
    distance = min(row)
    v_star = row.index(distance)
    return AwsedResult(v_star=v_star, suffix=tuple(ref[v_star:]), distance=distance)


def awsed_bruteforce(hyp_prefix, ref, costs: EditCosts = UNIT_COSTS) -> AwsedResult:
    """Reference implementation of awsed(): one full Levenshtein computation
    per candidate split point. Quadratically slower; kept as a cross-check."""
    best_v = 0
    best_d = levenshtein(hyp_prefix, ref[:0], costs)
    for v in range(1, len(ref) + 1):
        d = levenshtein(hyp_prefix, ref[:v], costs)
        if d < best_d:
            best_v, best_d = v, d
    return AwsedResult(v_star=best_v, suffix=tuple(ref[best_v:]), distance=best_d)


def edit_alignment(hyp, ref, costs: EditCosts = UNIT_COSTS) -> WerBreakdown:
    """Align ``hyp`` against ``ref`` and count the substitutions, deletions,
    insertions and matches of one minimal-cost edit script.

    On equal-cost alternatives the backtrace prefers match, then
    substitution, then deletion, then insertion, so the counts are
    deterministic even when several scripts share the minimal cost.
    """
    m, n = len(hyp), len(ref)
    sub_c, ins_c, del_c = costs.substitution, costs.insertion, costs.deletion
    mat = [[0] * (n + 1) for _ in range(m + 1)]
    for j in range(1, n + 1):
        mat[0][j] = j * del_c
    for i in range(1, m + 1):
        prev, cur = mat[i - 1], mat[i]
        cur[0] = i * ins_c
        hi = hyp[i - 1]
        for j in range(1, n + 1):
            best = prev[j - 1] if hi == ref[j - 1] else prev[j - 1] + sub_c
            via_del = cur[j - 1] + del_c
            if via_del < best:
                best = via_del
            via_ins = prev[j] + ins_c
            if via_ins < best:
                best = via_ins
            cur[j] = best
    subs = dels = inss = matches = 0
    i, j = m, n
    while i > 0 or j > 0:
        cost = mat[i][j]
        if i > 0 and j > 0 and hyp[i - 1] == ref[j - 1] and cost == mat[i - 1][j - 1]:
            matches += 1
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and hyp[i - 1] != ref[j - 1] and cost == mat[i - 1][j - 1] + sub_c:
            subs += 1
            i, j = i - 1, j - 1
        elif j > 0 and cost == mat[i][j - 1] + del_c:
            dels += 1
            j -= 1
        else:
            inss += 1
            i -= 1
    return WerBreakdown(subs, dels, inss, matches, n)
