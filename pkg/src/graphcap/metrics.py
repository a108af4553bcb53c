"""Caption evaluation: corpus BLEU@1-4, ROUGE-L and CIDEr.

All scorers work on pre-tokenized captions (lists of tokens). CIDEr follows
the consensus formulation: per-order TF-IDF cosine against each reference,
Gaussian length penalty (sigma=6), averaged over orders 1..4 and references,
scaled by 10.
"""

import math
from collections import Counter, defaultdict

from .errors import ValidationError

CIDER_SIGMA = 6.0
CIDER_ORDERS = 4
ROUGE_BETA = 1.2


def ngram_counts(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidates, references, n=4):
    """Corpus-level BLEU@n: geometric mean of modified precisions for orders
    1..n with brevity penalty, no smoothing.

    ``candidates``: list of token lists; ``references``: per-candidate list of
    reference token lists.
    """
    if not 1 <= n <= 4:
        raise ValidationError("bleu order must be in 1..4")
    candidates = list(candidates)
    references = list(references)
    if not candidates:
        raise ValidationError("no candidates to score")
    if len(candidates) != len(references) or any(not r for r in references):
        raise ValidationError("every candidate needs at least one reference")

    matched = [0] * n
    total = [0] * n
    cand_len = 0
    eff_ref_len = 0
    for cand, refs in zip(candidates, references):
        cand_len += len(cand)
        eff_ref_len += min((abs(len(r) - len(cand)), len(r)) for r in refs)[1]
        for k in range(1, n + 1):
            counts = ngram_counts(cand, k)
            max_ref = Counter()
            for ref in refs:
                for gram, c in ngram_counts(ref, k).items():
                    max_ref[gram] = max(max_ref[gram], c)
            matched[k - 1] += sum(min(c, max_ref[g]) for g, c in counts.items())
            total[k - 1] += max(len(cand) - k + 1, 0)

    if any(t == 0 or m == 0 for m, t in zip(matched, total)):
        return 0.0
    log_precision = sum(math.log(m / t) for m, t in zip(matched, total)) / n
    bp = 1.0 if cand_len > eff_ref_len else math.exp(1.0 - eff_ref_len / max(cand_len, 1))
    return bp * math.exp(log_precision)


def _lcs_length(a, b):
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(cur[j], prev[j + 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate, references):
    """Max over references of the LCS F-score with beta=1.2."""
    if not references:
        raise ValidationError("need at least one reference")
    best = 0.0
    for ref in references:
        lcs = _lcs_length(candidate, ref)
        if lcs == 0:
            continue
        prec = lcs / len(candidate)
        rec = lcs / len(ref)
        beta2 = ROUGE_BETA**2
        score = (1 + beta2) * prec * rec / (rec + beta2 * prec)
        best = max(best, score)
    return best


def rouge_l_corpus(candidates, references):
    candidates = list(candidates)
    if not candidates:
        raise ValidationError("no candidates to score")
    return sum(rouge_l(c, r) for c, r in zip(candidates, references)) / len(candidates)


class CiderScorer:
    """Corpus-IDF CIDEr. Build once from the reference corpus, then score any
    candidate against a video's references (used both for reporting and as the
    policy-gradient reward)."""

    def __init__(self, references):
        """``references``: dict video_id -> list of reference token lists."""
        if len(references) < 2:
            raise ValidationError("cider needs a corpus of >= 2 videos for idf")
        self.references = {vid: [list(r) for r in refs] for vid, refs in references.items()}
        self.log_num_videos = math.log(len(self.references))
        self.doc_freq = [defaultdict(int) for _ in range(CIDER_ORDERS)]
        for refs in self.references.values():
            seen = [set() for _ in range(CIDER_ORDERS)]
            for ref in refs:
                for k in range(CIDER_ORDERS):
                    seen[k].update(ngram_counts(ref, k + 1))
            for k in range(CIDER_ORDERS):
                for gram in seen[k]:
                    self.doc_freq[k][gram] += 1

    def _tfidf(self, tokens, order):
        vec = {}
        norm_sq = 0.0
        for gram, count in ngram_counts(tokens, order + 1).items():
            idf = self.log_num_videos - math.log(max(1.0, self.doc_freq[order][gram]))
            w = count * idf
            vec[gram] = w
            norm_sq += w * w
        return vec, math.sqrt(norm_sq)

    def score(self, video_id, candidate):
        """CIDEr of one candidate against its video's references."""
        refs = self.references.get(video_id)
        if not refs:
            raise ValidationError(f"no references for video {video_id!r}")
        total = 0.0
        for ref in refs:
            per_order = 0.0
            for k in range(CIDER_ORDERS):
                cvec, cnorm = self._tfidf(candidate, k)
                rvec, rnorm = self._tfidf(ref, k)
                if cnorm == 0.0 or rnorm == 0.0:
                    continue
                dot = sum(w * rvec[g] for g, w in cvec.items() if g in rvec)
                per_order += dot / (cnorm * rnorm)
            penalty = math.exp(-((len(candidate) - len(ref)) ** 2) / (2 * CIDER_SIGMA**2))
            total += penalty * per_order / CIDER_ORDERS
        return 10.0 * total / len(refs)

    def corpus_score(self, candidates):
        """Mean score over ``candidates``: dict video_id -> token list."""
        if not candidates:
            raise ValidationError("no candidates to score")
        return sum(self.score(vid, cand) for vid, cand in candidates.items()) / len(candidates)


def cider(candidates, references):
    """One-shot corpus CIDEr; both arguments keyed by video id."""
    return CiderScorer(references).corpus_score(candidates)


def score_report(candidates, references):
    """The standard report: BLEU@1-4, ROUGE-L and CIDEr for aligned dicts."""
    vids = sorted(candidates)
    cands = [candidates[v] for v in vids]
    refs = [references[v] for v in vids]
    report = {f"bleu{k}": bleu(cands, refs, k) for k in range(1, 5)}
    report["rougeL"] = rouge_l_corpus(cands, refs)
    report["cider"] = cider(candidates, references)
    return report
