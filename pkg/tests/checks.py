"""Property checks that drive package code (unlike ``oracles``)."""

from relseq.miner import check_vocabulary, compute_stats, mine_frequent, refine


def antimonotone_violations(data, cfg):
    """Mine ``data`` and, for every frequent pattern of every level, count
    refinements whose frequency exceeds their parent's. Returns
    (violations, refinements checked)."""
    vocab = check_vocabulary(data, cfg.bias)
    levels = []
    mine_frequent(data, cfg, on_level=lambda k, feats: levels.append(feats))
    bad = checked = 0
    for feats in levels:
        for f in feats:
            for child in refine(f.pattern, cfg.bias, vocab, cfg.max_nstep, cfg.dim_limit):
                checked += 1
                if compute_stats(child, data).freq > f.freq:
                    bad += 1
    return bad, checked
