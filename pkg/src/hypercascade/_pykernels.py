"""Pure-Python/numpy implementations of the hot loops.

Same signatures and bit-identical integer results as the compiled
``_ckernels`` extension; used when the extension is not built.
"""

import numpy as np


def process_pulses(u, pos, todo, cdf, fixed_n, chain, ps, depth_hist, pair_hist):
    """Consume uniforms ``u[pos:]`` pulse by pulse.

    Per pulse: draw the photon number by CDF inversion (one uniform) unless
    ``fixed_n >= 0``, then run each photon's Bernoulli chain, one uniform per
    crystal, stopping at the first failure.  A pulse is only started when the
    buffer is guaranteed to hold all of its draws.

    Returns ``(pulses_done, new_pos, successful_pulses)``; histograms are
    updated in place.
    """
    vals = u.tolist() if hasattr(u, "tolist") else list(u)
    cdf = cdf.tolist() if hasattr(cdf, "tolist") else list(cdf)
    size = len(vals)
    kmax = len(cdf) - 1
    rtop = len(pair_hist) - 1
    dh = [0] * (chain + 1)
    ph = [0] * (rtop + 1)
    done = 0
    good = 0
    while done < todo:
        start = pos
        if fixed_n >= 0:
            n = fixed_n
        else:
            if pos >= size:
                break
            x = vals[pos]
            pos += 1
            n = 0
            while n < kmax and x >= cdf[n]:
                n += 1
        if size - pos < n * chain:
            pos = start
            break
        r = 0
        for _ in range(n):
            d = 0
            while d < chain:
                x = vals[pos]
                pos += 1
                if x < ps:
                    d += 1
                else:
                    break
            dh[d] += 1
            if d == chain:
                r += 1
        ph[r if r < rtop else rtop] += 1
        if r:
            good += 1
        done += 1
    for i, c in enumerate(dh):
        depth_hist[i] += c
    for i, c in enumerate(ph):
        pair_hist[i] += c
    return done, pos, good


def enumerate_success(probs, n):
    """Σ over all ``len(probs)**n`` joint per-photon outcomes with at least one
    photon in the last (full-depth) state, of the product of probabilities.

    Builds the joint distribution as an explicit outer-product tensor, in
    slabs over the leading photons so memory stays bounded.
    """
    probs = np.asarray(probs, dtype=float)
    s = len(probs)
    if n == 0:
        return 0.0
    full = np.zeros(s, dtype=bool)
    full[-1] = True
    inner = min(n, 8)
    joint = np.ones(1)
    hit = np.zeros(1, dtype=bool)
    for _ in range(inner):
        joint = np.multiply.outer(joint, probs).ravel()
        hit = np.logical_or.outer(hit, full).ravel()
    outer = n - inner
    if outer == 0:
        return float(joint[hit].sum())
    total = 0.0
    miss_mass = float(joint[~hit].sum())
    hit_mass = float(joint[hit].sum())
    # walk every assignment of the leading photons explicitly
    idx = [0] * outer
    while True:
        w = 1.0
        any_full = False
        for i in idx:
            w *= probs[i]
            any_full = any_full or i == s - 1
        total += w * (hit_mass + (miss_mass if any_full else 0.0))
        j = outer - 1
        while j >= 0 and idx[j] == s - 1:
            idx[j] = 0
            j -= 1
        if j < 0:
            break
        idx[j] += 1
    return total
