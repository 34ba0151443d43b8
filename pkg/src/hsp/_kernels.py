"""Compiled inner loops for the shrinkage-partition pmf and the HSP sweep.

Everything here works on dense 0-based label arrays.  Random draws use
numba's own generator, seeded per chain through :func:`seed`.

Workspace arrays are ``size``, ``match``, ``nbase``, ``active`` and ``w``.
The three count arrays must be zero on entry and every routine restores
them before returning; ``active`` and ``w`` are scratch.
"""

import math

import numpy as np
from numba import njit

# exp(lambda) above this would overflow the linear-scale lookup table
TABLE_LAMBDA_LIMIT = 500.0
_TINY = 1e-280
_LOG_2PI = math.log(2.0 * math.pi)


def make_table(lam, n):
    """Lookup table ``exp(lam * m / nb)`` for a constant shrinkage vector.

    Returns an empty array when the vector is not constant or too large, which
    switches the kernels to the log-domain path.
    """
    lam = np.asarray(lam, dtype=np.float64)
    if lam.size == 0 or np.any(lam != lam[0]) or lam[0] > TABLE_LAMBDA_LIMIT:
        return np.zeros((0, 0))
    m = np.arange(n + 2)[:, None]
    nb = np.arange(n + 2)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(nb > 0, m / np.maximum(nb, 1), 0.0)
    # entries with m > nb never occur; clipping keeps exp finite
    return np.exp(lam[0] * np.minimum(frac, 1.0))


def make_workspace(n):
    n2 = n + 2
    return (
        np.zeros(n2, np.int64),
        np.zeros((n2, n2), np.int64),
        np.zeros(n2, np.int64),
        np.zeros(n2, np.int64),
        np.zeros(n2, np.float64),
    )


@njit(cache=True)
def seed(s):
    np.random.seed(s)


@njit(cache=True)
def _fill_weights(K, b, t, lam, table, mass, size, match, nbase, active, w):
    """Unnormalised allocation weights at position t; w[K] is the new cluster.

    Weights may be scaled by a common positive factor. Returns their sum.
    """
    nb = nbase[b]
    z = 0.0
    if table.shape[0] > 0:
        for a in range(K):
            lab = active[a]
            w[a] = size[lab] * table[match[lab, b], nb]
            z += w[a]
        if nb == 0:
            w[K] = mass * table[1, 1]
        else:
            w[K] = mass
        return z + w[K]
    lt = lam[t]
    enew = lt if nb == 0 else 0.0
    mx = enew
    for a in range(K):
        e = lt * match[active[a], b] / nb if nb > 0 else 0.0
        w[a] = e
        if e > mx:
            mx = e
    for a in range(K):
        w[a] = size[active[a]] * math.exp(w[a] - mx)
        z += w[a]
    w[K] = mass * math.exp(enew - mx)
    return z + w[K]


@njit(cache=True)
def sp_logpmf_from(labels, base, lam, table, perm, mass, start,
                   size, match, nbase, active, w):
    """Sum of log allocation terms at visit positions >= start.

    With start=0 this is the full SP log pmf.  Terms before ``start`` do not
    depend on the item visited at ``start``, so label updates only need the
    suffix.
    """
    n = labels.shape[0]
    K = 0
    logp = 0.0
    prod = 1.0
    for t in range(n):
        item = perm[t]
        s = labels[item]
        b = base[item]
        if t >= start and t > 0:
            z = _fill_weights(K, b, t, lam, table, mass, size, match, nbase, active, w)
            if table.shape[0] > 0:
                if size[s] > 0:
                    prod *= size[s] * table[match[s, b], nbase[b]] / z
                else:
                    prod *= w[K] / z
                if prod < _TINY:
                    logp += math.log(prod)
                    prod = 1.0
            else:
                # log-domain: recompute the chosen exponent so tiny terms stay exact
                nb = nbase[b]
                lt = lam[t]
                mx = lt if nb == 0 else 0.0
                for a in range(K):
                    e = lt * match[active[a], b] / nb if nb > 0 else 0.0
                    if e > mx:
                        mx = e
                if size[s] > 0:
                    e = lt * match[s, b] / nb if nb > 0 else 0.0
                    logp += math.log(size[s]) + e - mx - math.log(z)
                else:
                    e = lt if nb == 0 else 0.0
                    logp += math.log(mass) + e - mx - math.log(z)
        if size[s] == 0:
            active[K] = s
            K += 1
        size[s] += 1
        match[s, b] += 1
        nbase[b] += 1
    for t in range(n):
        item = perm[t]
        size[labels[item]] = 0
        match[labels[item], base[item]] = 0
        nbase[base[item]] = 0
    return logp + math.log(prod)


@njit(cache=True)
def _log_term(nc, m, b, t, lam, table, mass, size, match, nbase, xm, xb):
    """Log probability that the item at position t, with base label b, joins cluster m.

    Clusters are 0..nc-1, empty ones skipped; an empty m means a new cluster.
    With xb=1 the counts nbase[b] and match[xm, b] are taken one higher.
    """
    nb = nbase[b] + xb
    if table.shape[0] > 0:
        neww = mass * table[1, 1] if nb == 0 else mass
        z = neww
        for a in range(nc):
            if size[a] > 0:
                ma = match[a, b] + (xb if a == xm else 0)
                z += size[a] * table[ma, nb]
        if size[m] > 0:
            mm = match[m, b] + (xb if m == xm else 0)
            return math.log(size[m] * table[mm, nb] / z)
        return math.log(neww / z)
    lt = lam[t]
    enew = lt if nb == 0 else 0.0
    mx = enew
    for a in range(nc):
        if size[a] > 0 and nb > 0:
            e = lt * (match[a, b] + (xb if a == xm else 0)) / nb
            if e > mx:
                mx = e
    z = mass * math.exp(enew - mx)
    em = 0.0
    for a in range(nc):
        if size[a] > 0:
            e = lt * (match[a, b] + (xb if a == xm else 0)) / nb if nb > 0 else 0.0
            z += size[a] * math.exp(e - mx)
            if a == m:
                em = e
    if size[m] > 0:
        return math.log(size[m]) + em - mx - math.log(z)
    return math.log(mass) + enew - mx - math.log(z)


@njit(cache=True)
def relabel_scores(lab, i, nl, base, table, perm, s, mass, size, match, nbase, w, out):
    """Log pmf, up to a shared constant, of ``lab`` with item i moved to each of 0..nl.

    Labels other than i's must lie in 0..nl-1; nl stands for a new cluster and
    ``s`` is i's visit position.  Needs the lookup table.  Moving i into cluster
    l only changes l's weight at later positions, and never lowers it, so
    each later normaliser is updated in O(1) per option without cancellation.
    """
    n = lab.shape[0]
    bi = base[i]
    for l in range(nl + 1):
        out[l] = 0.0
    for t in range(n):
        item = perm[t]
        b = base[item]
        nb = nbase[b]
        if t < s:
            m = lab[item]
            size[m] += 1
            match[m, b] += 1
            nbase[b] += 1
            continue
        neww = mass * table[1, 1] if nb == 0 else mass
        if t == s:
            z = neww
            for l in range(nl):
                z += size[l] * table[match[l, b], nb]
            for l in range(nl):
                w[l] = (size[l] * table[match[l, b], nb] if size[l] > 0 else neww) / z
            w[nl] = neww / z
            nbase[b] += 1
            continue
        eq = 1 if b == bi else 0
        zm = neww
        for l in range(nl):
            zm += size[l] * table[match[l, b], nb]
        m = lab[item]
        numm = size[m] * table[match[m, b], nb] if size[m] > 0 else neww
        for l in range(nl + 1):
            sl = size[l]
            ml = match[l, b]
            wm = sl * table[ml, nb]
            wp = (sl + 1) * table[ml + eq, nb]
            w[l] *= (wp if m == l else numm) / (zm + wp - wm)
            if w[l] < _TINY:
                out[l] += math.log(w[l])
                w[l] = 1.0
        size[m] += 1
        match[m, b] += 1
        nbase[b] += 1
    for l in range(nl + 1):
        out[l] += math.log(w[l])
        w[l] = 0.0
    for t in range(n):
        item = perm[t]
        size[lab[item]] = 0
        match[lab[item], base[item]] = 0
        nbase[base[item]] = 0


@njit(cache=True)
def base_move_scores(labels, nc, base, i, D, lam, table, perm, mass,
                     size, match, nbase, out):
    """Add to out[d], d in 0..D, the log pmf of ``labels`` with base[i] set to d.

    Scores are exact up to a constant shared by all d.  Base labels other than
    i's must lie in 0..D-1.  Only positions after i whose base label is d
    depend on the choice, so one pass over the visit order suffices.
    """
    n = labels.shape[0]
    mi = labels[i]
    passed = False
    for t in range(n):
        item = perm[t]
        m = labels[item]
        if item == i:
            for d in range(D + 1):
                out[d] += _log_term(nc, mi, d, t, lam, table, mass, size, match, nbase, -1, 0)
            size[mi] += 1
            passed = True
            continue
        b = base[item]
        if passed:
            out[b] += (_log_term(nc, m, b, t, lam, table, mass, size, match, nbase, mi, 1)
                       - _log_term(nc, m, b, t, lam, table, mass, size, match, nbase, -1, 0))
        size[m] += 1
        match[m, b] += 1
        nbase[b] += 1
    for t in range(n):
        item = perm[t]
        size[labels[item]] = 0
        if item != i:
            match[labels[item], base[item]] = 0
            nbase[base[item]] = 0


@njit(cache=True)
def _pick(w, m, z):
    u = np.random.random() * z
    acc = 0.0
    for a in range(m):
        acc += w[a]
        if u < acc:
            return a
    return m - 1


@njit(cache=True)
def _pick_log(lw, m):
    mx = lw[0]
    for a in range(1, m):
        if lw[a] > mx:
            mx = lw[a]
    z = 0.0
    for a in range(m):
        lw[a] = math.exp(lw[a] - mx)
        z += lw[a]
    return _pick(lw, m, z)


@njit(cache=True)
def relabel_first_appearance(labels, mapping):
    """Canonicalise labels in place; mapping[new] = old. Returns cluster count."""
    n = labels.shape[0]
    for i in range(n + 1):
        mapping[i] = -1
    inv = np.full(n + 1, -1, np.int64)
    K = 0
    for i in range(n):
        old = labels[i]
        if inv[old] < 0:
            inv[old] = K
            mapping[K] = old
            K += 1
        labels[i] = inv[old]
    return K


@njit(cache=True)
def sp_draw(base, lam, table, perm, mass, out, size, match, nbase, active, w):
    """Forward-sample an SP partition into ``out`` (canonical). Returns K."""
    n = base.shape[0]
    K = 0
    for t in range(n):
        item = perm[t]
        b = base[item]
        if t == 0:
            a = 0
        else:
            z = _fill_weights(K, b, t, lam, table, mass, size, match, nbase, active, w)
            a = _pick(w, K + 1, z)
        if a == K:
            s = K
            active[K] = s
            K += 1
        else:
            s = active[a]
        out[item] = s
        size[s] += 1
        match[s, b] += 1
        nbase[b] += 1
    for t in range(n):
        item = perm[t]
        size[out[item]] = 0
        match[out[item], base[item]] = 0
        nbase[base[item]] = 0
    mapping = np.empty(n + 1, np.int64)
    relabel_first_appearance(out, mapping)
    return K


@njit(cache=True)
def sp_draw_many(base, lam, table, perm, mass, ndraws, size, match, nbase, active, w):
    n = base.shape[0]
    out = np.empty((ndraws, n), np.int64)
    row = np.empty(n, np.int64)
    for r in range(ndraws):
        sp_draw(base, lam, table, perm, mass, row, size, match, nbase, active, w)
        out[r] = row
    return out


@njit(cache=True)
def _propose_perm(cur, kshuf, prop):
    n = cur.shape[0]
    if kshuf >= n or kshuf <= 0:
        p = np.random.permutation(n)
        for i in range(n):
            prop[i] = p[i]
        return
    for i in range(n):
        prop[i] = cur[i]
    pos = np.random.permutation(n)[:kshuf]
    vals = np.empty(kshuf, np.int64)
    for a in range(kshuf):
        vals[a] = cur[pos[a]]
    order = np.random.permutation(kshuf)
    for a in range(kshuf):
        prop[pos[a]] = vals[order[a]]


@njit(cache=True)
def _loglik(y, mu, s2):
    d = y - mu
    return -0.5 * (_LOG_2PI + math.log(s2)) - 0.5 * d * d / s2


@njit(cache=True)
def prior_theta(a0, b0, d0, e0):
    mu = a0 + math.sqrt(b0) * np.random.normal()
    s2 = 1.0 / np.random.gamma(d0, 1.0 / e0)
    return mu, s2


@njit(cache=True)
def update_theta(y, pi, L, mu, s2, a0, b0, d0, e0, prior_only):
    """Two-block Gibbs update (mu | sigma2, then sigma2 | mu) for every cluster."""
    J = pi.shape[0]
    I = pi.shape[1]
    cnt = np.zeros(I, np.int64)
    sm = np.zeros(I)
    ss = np.zeros(I)
    for j in range(J):
        nl = L[j]
        for l in range(nl):
            cnt[l] = 0
            sm[l] = 0.0
            ss[l] = 0.0
        if not prior_only:
            for i in range(I):
                cnt[pi[j, i]] += 1
                sm[pi[j, i]] += y[i, j]
        for l in range(nl):
            if not prior_only and cnt[l] == 0:
                return False
            prec = 1.0 / b0[j] + cnt[l] / s2[j, l]
            mean = (a0[j] / b0[j] + sm[l] / s2[j, l]) / prec
            mu[j, l] = mean + np.random.normal() / math.sqrt(prec)
        if not prior_only:
            for i in range(I):
                d = y[i, j] - mu[j, pi[j, i]]
                ss[pi[j, i]] += d * d
        for l in range(nl):
            shape = d0[j] + 0.5 * cnt[l]
            scale = e0[j] + 0.5 * ss[l]
            s2[j, l] = 1.0 / np.random.gamma(shape, 1.0 / scale)
    return True


@njit(cache=True)
def _inverse(perm, inv):
    for t in range(perm.shape[0]):
        inv[perm[t]] = t


@njit(cache=True)
def step_pi(y, c, nus, pi, L, delta, mu, s2, lam, ltab, beta,
            a0, b0, d0, e0, prior_only, size, match, nbase, active, w):
    """Gibbs sweep over every condition label of every subject."""
    J = pi.shape[0]
    I = pi.shape[1]
    pos = np.empty(I, np.int64)
    cnt = np.zeros(I + 1, np.int64)
    lw = np.empty(I + 1)
    mapping = np.empty(I + 1, np.int64)
    tmu = np.empty(I)
    ts2 = np.empty(I)
    for j in range(J):
        base = nus[c[j]]
        lab = pi[j]
        _inverse(delta[j], pos)
        nl = L[j]
        for l in range(I + 1):
            cnt[l] = 0
        for i in range(I):
            cnt[lab[i]] += 1
        for i in range(I):
            old = lab[i]
            if cnt[old] == 1:
                aux_mu = mu[j, old]
                aux_s2 = s2[j, old]
                last = nl - 1
                if old != last:
                    for q in range(I):
                        if lab[q] == last:
                            lab[q] = old
                    mu[j, old] = mu[j, last]
                    s2[j, old] = s2[j, last]
                    cnt[old] = cnt[last]
                cnt[last] = 0
                nl -= 1
            else:
                cnt[old] -= 1
                aux_mu, aux_s2 = prior_theta(a0[j], b0[j], d0[j], e0[j])
            start = pos[i]
            if ltab.shape[0] > 0:
                relabel_scores(lab, i, nl, base, ltab, delta[j], start, beta,
                               size, match, nbase, w, lw)
            for l in range(nl + 1):
                if ltab.shape[0] > 0:
                    v = lw[l]
                else:
                    lab[i] = l
                    v = sp_logpmf_from(lab, base, lam, ltab, delta[j], beta, start,
                                       size, match, nbase, active, w)
                if not prior_only:
                    if l < nl:
                        v += _loglik(y[i, j], mu[j, l], s2[j, l])
                    else:
                        v += _loglik(y[i, j], aux_mu, aux_s2)
                lw[l] = v
            l = _pick_log(lw, nl + 1)
            lab[i] = l
            cnt[l] += 1
            if l == nl:
                mu[j, nl] = aux_mu
                s2[j, nl] = aux_s2
                nl += 1
        nl = relabel_first_appearance(lab, mapping)
        for l in range(nl):
            tmu[l] = mu[j, mapping[l]]
            ts2[l] = s2[j, mapping[l]]
        for l in range(nl):
            mu[j, l] = tmu[l]
            s2[j, l] = ts2[l]
        L[j] = nl


@njit(cache=True)
def mh_permutation(labels, base, perm, lam, ltab, mass, kshuf, skip,
                   size, match, nbase, active, w):
    """One Metropolis-Hastings update of a visit order. Returns 1 if accepted."""
    n = perm.shape[0]
    prop = np.empty(n, np.int64)
    _propose_perm(perm, kshuf, prop)
    if skip:
        accept = True
    else:
        cur = sp_logpmf_from(labels, base, lam, ltab, perm, mass, 0,
                             size, match, nbase, active, w)
        new = sp_logpmf_from(labels, base, lam, ltab, prop, mass, 0,
                             size, match, nbase, active, w)
        diff = new - cur
        accept = diff >= 0.0 or math.log(np.random.random()) < diff
    if accept:
        for t in range(n):
            perm[t] = prop[t]
        return 1
    return 0


@njit(cache=True)
def step_delta(c, nus, pi, delta, lam, ltab, beta, kshuf, skip,
               size, match, nbase, active, w):
    acc = 0
    for j in range(pi.shape[0]):
        acc += mh_permutation(pi[j], nus[c[j]], delta[j], lam, ltab, beta, kshuf, skip,
                              size, match, nbase, active, w)
    return acc


@njit(cache=True)
def step_c(c, kk, zeta, c0, tau, ttab, alpha0, nus, eps, nu0, rho, rtab, beta0,
           pi, delta, lam, ltab, beta, size, match, nbase, active, w):
    """Gibbs sweep over subject labels, one auxiliary base partition per update."""
    J = c.shape[0]
    I = nus.shape[1]
    K = kk[0]
    pos = np.empty(J, np.int64)
    _inverse(zeta, pos)
    cnt = np.zeros(J + 1, np.int64)
    lw = np.empty(J + 1)
    aux_nu = np.empty(I, np.int64)
    aux_eps = np.empty(I, np.int64)
    mapping = np.empty(J + 1, np.int64)
    for j in range(J):
        cnt[c[j]] += 1
    for j in range(J):
        old = c[j]
        if cnt[old] == 1:
            for i in range(I):
                aux_nu[i] = nus[old, i]
                aux_eps[i] = eps[old, i]
            last = K - 1
            if old != last:
                for q in range(J):
                    if c[q] == last:
                        c[q] = old
                for i in range(I):
                    nus[old, i] = nus[last, i]
                    eps[old, i] = eps[last, i]
                cnt[old] = cnt[last]
            cnt[last] = 0
            K -= 1
        else:
            cnt[old] -= 1
            p = np.random.permutation(I)
            for i in range(I):
                aux_eps[i] = p[i]
            sp_draw(nu0, rho, rtab, aux_eps, beta0, aux_nu, size, match, nbase, active, w)
        start = pos[j]
        for k in range(K + 1):
            c[j] = k
            v = sp_logpmf_from(c, c0, tau, ttab, zeta, alpha0, start,
                               size, match, nbase, active, w)
            if k < K:
                v += sp_logpmf_from(pi[j], nus[k], lam, ltab, delta[j], beta, 0,
                                    size, match, nbase, active, w)
            else:
                v += sp_logpmf_from(pi[j], aux_nu, lam, ltab, delta[j], beta, 0,
                                    size, match, nbase, active, w)
            lw[k] = v
        k = _pick_log(lw, K + 1)
        c[j] = k
        cnt[k] += 1
        if k == K:
            for i in range(I):
                nus[K, i] = aux_nu[i]
                eps[K, i] = aux_eps[i]
            K += 1
    K = relabel_first_appearance(c, mapping)
    tn = nus[:K].copy()
    te = eps[:K].copy()
    for k in range(K):
        nus[k] = tn[mapping[k]]
        eps[k] = te[mapping[k]]
    kk[0] = K


@njit(cache=True)
def step_nu(c, kk, nus, eps, nu0, rho, rtab, beta0, pi, L, delta, lam, ltab, beta,
            size, match, nbase, active, w):
    """Gibbs sweep over the labels of every group-level base partition."""
    J = c.shape[0]
    I = nus.shape[1]
    K = kk[0]
    members = np.empty(J, np.int64)
    invd = np.empty((J, I), np.int64)
    for j in range(J):
        _inverse(delta[j], invd[j])
    pose = np.empty(I, np.int64)
    cnt = np.zeros(I + 1, np.int64)
    lw = np.empty(I + 1)
    mapping = np.empty(I + 1, np.int64)
    for k in range(K):
        nm = 0
        for j in range(J):
            if c[j] == k:
                members[nm] = j
                nm += 1
        lab = nus[k]
        _inverse(eps[k], pose)
        for d in range(I + 1):
            cnt[d] = 0
        D = 0
        for i in range(I):
            cnt[lab[i]] += 1
            if lab[i] + 1 > D:
                D = lab[i] + 1
        for i in range(I):
            old = lab[i]
            if cnt[old] == 1:
                last = D - 1
                if old != last:
                    for q in range(I):
                        if lab[q] == last:
                            lab[q] = old
                    cnt[old] = cnt[last]
                cnt[last] = 0
                D -= 1
            else:
                cnt[old] -= 1
            if rtab.shape[0] > 0:
                relabel_scores(lab, i, D, nu0, rtab, eps[k], pose[i], beta0,
                               size, match, nbase, w, lw)
            else:
                for d in range(D + 1):
                    lab[i] = d
                    lw[d] = sp_logpmf_from(lab, nu0, rho, rtab, eps[k], beta0, pose[i],
                                           size, match, nbase, active, w)
            for a in range(nm):
                j = members[a]
                base_move_scores(pi[j], L[j], lab, i, D, lam, ltab, delta[j], beta,
                                 size, match, nbase, lw)
            d = _pick_log(lw, D + 1)
            lab[i] = d
            cnt[d] += 1
            if d == D:
                D += 1
        relabel_first_appearance(lab, mapping)


@njit(cache=True)
def step_eps(kk, nus, eps, nu0, rho, rtab, beta0, kshuf, skip,
             size, match, nbase, active, w):
    acc = 0
    for k in range(kk[0]):
        acc += mh_permutation(nus[k], nu0, eps[k], rho, rtab, beta0, kshuf, skip,
                              size, match, nbase, active, w)
    return acc


@njit(cache=True)
def sweep(y, c, kk, zeta, nus, eps, pi, L, delta, mu, s2,
          c0, nu0, tau, rho, lam, ttab, rtab, ltab, alpha0, beta0, beta,
          a0, b0, d0, e0, prior_only, kshuf, skip_tau, skip_rho, skip_lam,
          acc, size, match, nbase, active, w):
    """One full iteration: theta, pi, delta, c, zeta, nu*, eps* in that order.

    ``acc[:3]`` accumulates accepted moves for (delta, zeta, eps*) and
    ``acc[3:]`` the matching proposal counts.
    """
    ok = update_theta(y, pi, L, mu, s2, a0, b0, d0, e0, prior_only)
    if not ok:
        return False
    step_pi(y, c, nus, pi, L, delta, mu, s2, lam, ltab, beta,
            a0, b0, d0, e0, prior_only, size, match, nbase, active, w)
    acc[0] += step_delta(c, nus, pi, delta, lam, ltab, beta, kshuf, skip_lam,
                         size, match, nbase, active, w)
    step_c(c, kk, zeta, c0, tau, ttab, alpha0, nus, eps, nu0, rho, rtab, beta0,
           pi, delta, lam, ltab, beta, size, match, nbase, active, w)
    acc[1] += mh_permutation(c, c0, zeta, tau, ttab, alpha0, kshuf, skip_tau,
                             size, match, nbase, active, w)
    step_nu(c, kk, nus, eps, nu0, rho, rtab, beta0, pi, L, delta, lam, ltab, beta,
            size, match, nbase, active, w)
    acc[2] += step_eps(kk, nus, eps, nu0, rho, rtab, beta0, kshuf, skip_rho,
                       size, match, nbase, active, w)
    acc[3] += c.shape[0]
    acc[4] += 1
    acc[5] += kk[0]
    return True


@njit(cache=True)
def init_from_prior(c, kk, zeta, nus, eps, pi, L, delta, mu, s2,
                    c0, nu0, tau, rho, lam, ttab, rtab, ltab, alpha0, beta0, beta,
                    a0, b0, d0, e0, size, match, nbase, active, w):
    """Draw a complete state from the HSP prior."""
    J = pi.shape[0]
    I = pi.shape[1]
    p = np.random.permutation(J)
    for j in range(J):
        zeta[j] = p[j]
    K = sp_draw(c0, tau, ttab, zeta, alpha0, c, size, match, nbase, active, w)
    kk[0] = K
    for k in range(K):
        q = np.random.permutation(I)
        for i in range(I):
            eps[k, i] = q[i]
        sp_draw(nu0, rho, rtab, eps[k], beta0, nus[k], size, match, nbase, active, w)
    for j in range(J):
        q = np.random.permutation(I)
        for i in range(I):
            delta[j, i] = q[i]
        L[j] = sp_draw(nus[c[j]], lam, ltab, delta[j], beta, pi[j], size, match, nbase, active, w)
        for l in range(L[j]):
            mu[j, l], s2[j, l] = prior_theta(a0[j], b0[j], d0[j], e0[j])
