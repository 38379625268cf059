// Exact minimum-weight perfect matching via Edmonds' blossom algorithm.
//
// This is a C++ port of the Galil-style primal-dual implementation used by
// networkx.max_weight_matching (after Joris van Rantwijk's mwmatching).
// Vertices are 0..n-1, non-trivial blossoms get ids n..2n-1.  The input
// weights are negated internally so that a maximum-cardinality maximum-weight
// matching is a minimum-weight perfect matching.  Every call finishes with a
// full complementary-slackness check of the dual certificate, so an optimal
// matching is returned or an exception is raised; a silently wrong answer is
// not possible.
#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <vector>
#include <utility>
#include <stdexcept>
#include <algorithm>

namespace py = pybind11;

namespace {

using std::vector;
using std::pair;

const long long NO_EDGE = -0x3f3f3f3f3f3f3f3fLL;

struct Matcher {
    int n;                       // number of vertices
    int nb;                      // id space size: 2 * n
    vector<vector<int>> nbr;     // adjacency (neighbor vertices)
    vector<vector<long long>> wmat;  // dense weight matrix (maximized weights)
    vector<vector<bool>> adj;

    vector<int> mate;            // mate[v] = partner vertex or -1
    vector<int> label;           // 0 free, 1 S, 2 T, 5 breadcrumb
    vector<pair<int, int>> labeledge;  // (-1,-1) if none
    vector<int> inblossom;       // top-level blossom of each vertex
    vector<int> blossomparent;   // -1 if top level
    vector<int> blossombase;     // base vertex of each (sub-)blossom
    vector<pair<int, int>> bestedge;   // least-slack edge per blossom id
    vector<long long> dualvar;   // per vertex: 2*u(v)
    vector<long long> blossomdual;     // per blossom id >= n
    vector<bool> active;         // blossom id in use
    vector<vector<int>> childs;
    vector<vector<pair<int, int>>> bedges;
    vector<vector<pair<int, int>>> mybestedges;
    vector<bool> havebestedges;
    vector<bool> allowedge;      // dense n*n
    vector<int> queue;
    vector<int> unused;          // free blossom ids

    explicit Matcher(int n_) : n(n_), nb(2 * n_) {
        nbr.resize(n);
        wmat.assign(n, vector<long long>(n, NO_EDGE));
        adj.assign(n, vector<bool>(n, false));
        mate.assign(n, -1);
        label.assign(nb, 0);
        labeledge.assign(nb, {-1, -1});
        inblossom.resize(n);
        blossomparent.assign(nb, -1);
        blossombase.assign(nb, -1);
        bestedge.assign(nb, {-1, -1});
        dualvar.assign(n, 0);
        blossomdual.assign(nb, 0);
        active.assign(nb, false);
        childs.resize(nb);
        bedges.resize(nb);
        mybestedges.resize(nb);
        havebestedges.assign(nb, false);
        allowedge.assign((size_t)n * n, false);
        for (int v = 0; v < n; v++) {
            inblossom[v] = v;
            blossombase[v] = v;
        }
        for (int b = nb - 1; b >= n; b--) unused.push_back(b);
    }

    static void check(bool cond, const char* what) {
        if (!cond) throw std::runtime_error(
            std::string("blossom matching internal check failed: ") + what);
    }

    bool allowed(int v, int w) const { return allowedge[(size_t)v * n + w]; }
    void allow(int v, int w) {
        allowedge[(size_t)v * n + w] = allowedge[(size_t)w * n + v] = true;
    }

    long long slack(int v, int w) const {
        return dualvar[v] + dualvar[w] - 2 * wmat[v][w];
    }

    void leaves(int b, vector<int>& out) const {
        if (b < n) { out.push_back(b); return; }
        for (int t : childs[b]) leaves(t, out);
    }

    void assignLabel(int w, int t, int v) {
        int b = inblossom[w];
        check(label[w] == 0 && label[b] == 0, "assignLabel on labeled node");
        label[w] = label[b] = t;
        if (v != -1) labeledge[w] = labeledge[b] = {v, w};
        else labeledge[w] = labeledge[b] = {-1, -1};
        bestedge[w] = bestedge[b] = {-1, -1};
        if (t == 1) {
            if (b >= n) leaves(b, queue);
            else queue.push_back(b);
        } else if (t == 2) {
            int base = blossombase[b];
            check(mate[base] != -1, "T-blossom base unmatched");
            assignLabel(mate[base], 1, base);
        }
    }

    int scanBlossom(int v, int w) {
        vector<int> path;
        int base = -1;
        while (v != -1) {
            int b = inblossom[v];
            if (label[b] & 4) { base = blossombase[b]; break; }
            check(label[b] == 1, "scanBlossom expects S-label");
            path.push_back(b);
            label[b] = 5;
            if (labeledge[b].first == -1) {
                check(mate[blossombase[b]] == -1, "single base matched");
                v = -1;
            } else {
                check(labeledge[b].first == mate[blossombase[b]],
                      "labeledge mate mismatch");
                v = labeledge[b].first;
                b = inblossom[v];
                check(label[b] == 2, "expected T-blossom on trace");
                v = labeledge[b].first;
            }
            if (w != -1) std::swap(v, w);
        }
        for (int b : path) label[b] = 1;
        return base;
    }

    void addBlossom(int base, int v, int w) {
        int bb = inblossom[base];
        int bv = inblossom[v];
        int bw = inblossom[w];
        check(!unused.empty(), "ran out of blossom ids");
        int b = unused.back();
        unused.pop_back();
        active[b] = true;
        blossombase[b] = base;
        blossomparent[b] = -1;
        blossomparent[bb] = b;
        childs[b].clear();
        bedges[b].clear();
        bedges[b].push_back({v, w});
        while (bv != bb) {
            blossomparent[bv] = b;
            childs[b].push_back(bv);
            bedges[b].push_back(labeledge[bv]);
            check(label[bv] == 2 ||
                  (label[bv] == 1 &&
                   labeledge[bv].first == mate[blossombase[bv]]),
                  "bad label tracing v-side");
            v = labeledge[bv].first;
            bv = inblossom[v];
        }
        childs[b].push_back(bb);
        std::reverse(childs[b].begin(), childs[b].end());
        std::reverse(bedges[b].begin(), bedges[b].end());
        while (bw != bb) {
            blossomparent[bw] = b;
            childs[b].push_back(bw);
            bedges[b].push_back({labeledge[bw].second, labeledge[bw].first});
            check(label[bw] == 2 ||
                  (label[bw] == 1 &&
                   labeledge[bw].first == mate[blossombase[bw]]),
                  "bad label tracing w-side");
            w = labeledge[bw].first;
            bw = inblossom[w];
        }
        check(label[bb] == 1, "blossom base not S");
        label[b] = 1;
        labeledge[b] = labeledge[bb];
        blossomdual[b] = 0;
        vector<int> lv;
        leaves(b, lv);
        for (int q : lv) {
            if (label[inblossom[q]] == 2) queue.push_back(q);
            inblossom[q] = b;
        }
        // Compute least-slack edges to neighboring S-blossoms.
        vector<pair<int, int>> bestedgeto(nb, {-1, -1});
        for (int child : childs[b]) {
            vector<pair<int, int>> nblist;
            if (child >= n) {
                if (havebestedges[child]) {
                    nblist = std::move(mybestedges[child]);
                    havebestedges[child] = false;
                    mybestedges[child].clear();
                } else {
                    vector<int> clv;
                    leaves(child, clv);
                    for (int q : clv)
                        for (int u : nbr[q])
                            if (q != u) nblist.push_back({q, u});
                }
            } else {
                for (int u : nbr[child])
                    if (child != u) nblist.push_back({child, u});
            }
            for (auto& k : nblist) {
                int i = k.first, j = k.second;
                if (inblossom[j] == b) std::swap(i, j);
                int bj = inblossom[j];
                if (bj != b && label[bj] == 1 &&
                    (bestedgeto[bj].first == -1 ||
                     slack(i, j) < slack(bestedgeto[bj].first,
                                         bestedgeto[bj].second)))
                    bestedgeto[bj] = {i, j};
            }
            bestedge[child] = {-1, -1};
        }
        mybestedges[b].clear();
        for (int bj = 0; bj < nb; bj++)
            if (bestedgeto[bj].first != -1)
                mybestedges[b].push_back(bestedgeto[bj]);
        havebestedges[b] = true;
        bestedge[b] = {-1, -1};
        long long bestslack = 0;
        for (auto& k : mybestedges[b]) {
            long long ks = slack(k.first, k.second);
            if (bestedge[b].first == -1 || ks < bestslack) {
                bestedge[b] = k;
                bestslack = ks;
            }
        }
    }

    int wrap(int j, int len) const { return ((j % len) + len) % len; }

    void expandBlossom(int b, bool endstage) {
        for (int s : childs[b]) {
            blossomparent[s] = -1;
            if (s >= n) {
                if (endstage && blossomdual[s] == 0) {
                    expandBlossom(s, endstage);
                } else {
                    vector<int> lv;
                    leaves(s, lv);
                    for (int q : lv) inblossom[q] = s;
                }
            } else {
                inblossom[s] = s;
            }
        }
        if (!endstage && label[b] == 2) {
            int entrychild = inblossom[labeledge[b].second];
            int len = (int)childs[b].size();
            int j = 0;
            while (childs[b][j] != entrychild) j++;
            int jstep;
            if (j & 1) { j -= len; jstep = 1; }
            else jstep = -1;
            int v = labeledge[b].first, w = labeledge[b].second;
            while (j != 0) {
                int p, q;
                if (jstep == 1) {
                    p = bedges[b][wrap(j, len)].first;
                    q = bedges[b][wrap(j, len)].second;
                } else {
                    q = bedges[b][wrap(j - 1, len)].first;
                    p = bedges[b][wrap(j - 1, len)].second;
                }
                label[w] = 0;
                label[q] = 0;
                assignLabel(w, 2, v);
                allow(p, q);
                j += jstep;
                if (jstep == 1) {
                    v = bedges[b][wrap(j, len)].first;
                    w = bedges[b][wrap(j, len)].second;
                } else {
                    w = bedges[b][wrap(j - 1, len)].first;
                    v = bedges[b][wrap(j - 1, len)].second;
                }
                allow(v, w);
                j += jstep;
            }
            int bw = childs[b][wrap(j, len)];
            label[w] = label[bw] = 2;
            labeledge[w] = labeledge[bw] = {v, w};
            bestedge[bw] = {-1, -1};
            j += jstep;
            while (childs[b][wrap(j, len)] != entrychild) {
                int bv = childs[b][wrap(j, len)];
                if (label[bv] == 1) { j += jstep; continue; }
                int reach = -1;
                if (bv >= n) {
                    vector<int> lv;
                    leaves(bv, lv);
                    for (int q : lv)
                        if (label[q] != 0) { reach = q; break; }
                } else {
                    reach = bv;
                }
                if (reach != -1 && label[reach] != 0) {
                    check(label[reach] == 2, "expected reachable T-vertex");
                    check(inblossom[reach] == bv, "reach not in sub-blossom");
                    label[reach] = 0;
                    label[mate[blossombase[bv]]] = 0;
                    assignLabel(reach, 2, labeledge[reach].first);
                }
                j += jstep;
            }
        }
        label[b] = 0;
        labeledge[b] = {-1, -1};
        bestedge[b] = {-1, -1};
        blossomparent[b] = -1;
        blossombase[b] = -1;
        blossomdual[b] = 0;
        havebestedges[b] = false;
        mybestedges[b].clear();
        active[b] = false;
        unused.push_back(b);
    }

    void augmentBlossom(int b, int v) {
        int t = v;
        while (blossomparent[t] != b) t = blossomparent[t];
        if (t >= n) augmentBlossom(t, v);
        int len = (int)childs[b].size();
        int i = 0;
        while (childs[b][i] != t) i++;
        int j = i, jstep;
        if (i & 1) { j -= len; jstep = 1; }
        else jstep = -1;
        while (j != 0) {
            j += jstep;
            t = childs[b][wrap(j, len)];
            int w, x;
            if (jstep == 1) {
                w = bedges[b][wrap(j, len)].first;
                x = bedges[b][wrap(j, len)].second;
            } else {
                x = bedges[b][wrap(j - 1, len)].first;
                w = bedges[b][wrap(j - 1, len)].second;
            }
            if (t >= n) augmentBlossom(t, w);
            j += jstep;
            t = childs[b][wrap(j, len)];
            if (t >= n) augmentBlossom(t, x);
            mate[w] = x;
            mate[x] = w;
        }
        std::rotate(childs[b].begin(), childs[b].begin() + i, childs[b].end());
        std::rotate(bedges[b].begin(), bedges[b].begin() + i, bedges[b].end());
        blossombase[b] = blossombase[childs[b][0]];
        check(blossombase[b] == v, "augmentBlossom base mismatch");
    }

    void augmentMatching(int v, int w) {
        int s = v, j = w;
        for (int side = 0; side < 2; side++) {
            if (side == 1) { s = w; j = v; }
            while (true) {
                int bs = inblossom[s];
                check(label[bs] == 1, "augment path not S");
                check((labeledge[bs].first == -1 &&
                       mate[blossombase[bs]] == -1) ||
                      labeledge[bs].first == mate[blossombase[bs]],
                      "augment labeledge mismatch");
                if (bs >= n) augmentBlossom(bs, s);
                mate[s] = j;
                if (labeledge[bs].first == -1) break;
                int t = labeledge[bs].first;
                int bt = inblossom[t];
                check(label[bt] == 2, "augment expects T-blossom");
                s = labeledge[bt].first;
                j = labeledge[bt].second;
                check(blossombase[bt] == t, "augment T base mismatch");
                if (bt >= n) augmentBlossom(bt, j);
                mate[j] = s;
            }
        }
    }

    void verifyOptimum() {
        // Complementary-slackness certificate of maximum-cardinality
        // maximum-weight matching.
        long long vdualoffset = 0;
        long long mindual = dualvar[0];
        for (int v = 0; v < n; v++) mindual = std::min(mindual, dualvar[v]);
        vdualoffset = std::max(0LL, -mindual);
        check(mindual + vdualoffset >= 0, "negative vertex dual");
        for (int b = n; b < nb; b++)
            if (active[b]) check(blossomdual[b] >= 0, "negative blossom dual");
        for (int i = 0; i < n; i++) {
            for (int j : nbr[i]) {
                if (j <= i) continue;
                long long s = dualvar[i] + dualvar[j] - 2 * wmat[i][j];
                vector<int> ib{i}, jb{j};
                while (blossomparent[ib.back()] != -1)
                    ib.push_back(blossomparent[ib.back()]);
                while (blossomparent[jb.back()] != -1)
                    jb.push_back(blossomparent[jb.back()]);
                std::reverse(ib.begin(), ib.end());
                std::reverse(jb.begin(), jb.end());
                for (size_t k = 0; k < std::min(ib.size(), jb.size()); k++) {
                    if (ib[k] != jb[k]) break;
                    s += 2 * blossomdual[ib[k]];
                }
                check(s >= 0, "negative slack in certificate");
                if (mate[i] == j || mate[j] == i) {
                    check(mate[i] == j && mate[j] == i, "asymmetric mate");
                    check(s == 0, "matched edge with nonzero slack");
                }
            }
        }
        for (int v = 0; v < n; v++)
            check(mate[v] != -1 || dualvar[v] + vdualoffset == 0,
                  "single vertex with positive dual");
        for (int b = n; b < nb; b++) {
            if (!active[b] || blossomdual[b] <= 0) continue;
            check(bedges[b].size() % 2 == 1, "even blossom");
            for (size_t k = 1; k < bedges[b].size(); k += 2) {
                int i = bedges[b][k].first, j = bedges[b][k].second;
                check(mate[i] == j && mate[j] == i, "non-full tight blossom");
            }
        }
    }

    void solve() {
        long long maxweight = 0;
        for (int v = 0; v < n; v++)
            for (int u : nbr[v])
                maxweight = std::max(maxweight, wmat[v][u]);
        dualvar.assign(n, maxweight);

        long long guard = 0;
        const long long guard_limit = 64LL * n * n * n + 4096;
        while (true) {
            // stage
            std::fill(label.begin(), label.end(), 0);
            std::fill(labeledge.begin(), labeledge.end(),
                      std::make_pair(-1, -1));
            std::fill(bestedge.begin(), bestedge.end(),
                      std::make_pair(-1, -1));
            for (int b = n; b < nb; b++)
                if (active[b]) { havebestedges[b] = false; mybestedges[b].clear(); }
            std::fill(allowedge.begin(), allowedge.end(), false);
            queue.clear();
            for (int v = 0; v < n; v++)
                if (mate[v] == -1 && label[inblossom[v]] == 0)
                    assignLabel(v, 1, -1);
            bool augmented = false;
            while (true) {
                // substage
                check(++guard < guard_limit, "iteration guard exceeded");
                while (!queue.empty() && !augmented) {
                    int v = queue.back();
                    queue.pop_back();
                    check(label[inblossom[v]] == 1, "queued non-S vertex");
                    for (int w : nbr[v]) {
                        if (w == v) continue;
                        int bv = inblossom[v], bw = inblossom[w];
                        if (bv == bw) continue;
                        long long kslack = 0;
                        if (!allowed(v, w)) {
                            kslack = slack(v, w);
                            if (kslack <= 0) allow(v, w);
                        }
                        if (allowed(v, w)) {
                            if (label[bw] == 0) {
                                assignLabel(w, 2, v);
                            } else if (label[bw] == 1) {
                                int base = scanBlossom(v, w);
                                if (base != -1) {
                                    addBlossom(base, v, w);
                                } else {
                                    augmentMatching(v, w);
                                    augmented = true;
                                    break;
                                }
                            } else if (label[w] == 0) {
                                check(label[bw] == 2, "inconsistent labels");
                                label[w] = 2;
                                labeledge[w] = {v, w};
                            }
                        } else if (label[bw] == 1) {
                            if (bestedge[bv].first == -1 ||
                                kslack < slack(bestedge[bv].first,
                                               bestedge[bv].second))
                                bestedge[bv] = {v, w};
                        } else if (label[w] == 0) {
                            if (bestedge[w].first == -1 ||
                                kslack < slack(bestedge[w].first,
                                               bestedge[w].second))
                                bestedge[w] = {v, w};
                        }
                    }
                }
                if (augmented) break;

                // dual update (maximum-cardinality mode: no delta1)
                int deltatype = -1;
                long long delta = 0;
                pair<int, int> deltaedge{-1, -1};
                int deltablossom = -1;
                for (int v = 0; v < n; v++) {
                    if (label[inblossom[v]] == 0 &&
                        bestedge[v].first != -1) {
                        long long d = slack(bestedge[v].first,
                                            bestedge[v].second);
                        if (deltatype == -1 || d < delta) {
                            delta = d;
                            deltatype = 2;
                            deltaedge = bestedge[v];
                        }
                    }
                }
                for (int b = 0; b < nb; b++) {
                    if (b >= n && !active[b]) continue;
                    if (blossomparent[b] == -1 && label[b] == 1 &&
                        bestedge[b].first != -1) {
                        long long ks = slack(bestedge[b].first,
                                             bestedge[b].second);
                        check(ks % 2 == 0, "odd S-S slack");
                        long long d = ks / 2;
                        if (deltatype == -1 || d < delta) {
                            delta = d;
                            deltatype = 3;
                            deltaedge = bestedge[b];
                        }
                    }
                }
                for (int b = n; b < nb; b++) {
                    if (active[b] && blossomparent[b] == -1 &&
                        label[b] == 2 &&
                        (deltatype == -1 || blossomdual[b] < delta)) {
                        delta = blossomdual[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if (deltatype == -1) {
                    deltatype = 1;
                    long long mindual = dualvar[0];
                    for (int v = 0; v < n; v++)
                        mindual = std::min(mindual, dualvar[v]);
                    delta = std::max(0LL, mindual);
                }
                for (int v = 0; v < n; v++) {
                    if (label[inblossom[v]] == 1) dualvar[v] -= delta;
                    else if (label[inblossom[v]] == 2) dualvar[v] += delta;
                }
                for (int b = n; b < nb; b++) {
                    if (active[b] && blossomparent[b] == -1) {
                        if (label[b] == 1) blossomdual[b] += delta;
                        else if (label[b] == 2) blossomdual[b] -= delta;
                    }
                }
                if (deltatype == 1) {
                    break;
                } else if (deltatype == 2) {
                    int v = deltaedge.first, w = deltaedge.second;
                    check(label[inblossom[v]] == 1, "delta2 edge not from S");
                    allow(v, w);
                    queue.push_back(v);
                } else if (deltatype == 3) {
                    int v = deltaedge.first, w = deltaedge.second;
                    allow(v, w);
                    check(label[inblossom[v]] == 1, "delta3 edge not from S");
                    queue.push_back(v);
                } else if (deltatype == 4) {
                    expandBlossom(deltablossom, false);
                }
            }
            for (int v = 0; v < n; v++)
                if (mate[v] != -1)
                    check(mate[mate[v]] == v, "asymmetric matching");
            if (!augmented) break;
            for (int b = n; b < nb; b++)
                if (active[b] && blossomparent[b] == -1 && label[b] == 1 &&
                    blossomdual[b] == 0)
                    expandBlossom(b, true);
        }
        verifyOptimum();
    }
};

}  // namespace

// edges: (m, 2) int array, weights: (m,) int64 array, n_vertices even.
// Returns a flat int array [u0, v0, u1, v1, ...] of matched pairs.
py::array_t<int> min_weight_perfect_matching(
        int n_vertices,
        py::array_t<int, py::array::c_style | py::array::forcecast> edges,
        py::array_t<long long, py::array::c_style | py::array::forcecast> weights) {
    if (n_vertices % 2 != 0)
        throw std::invalid_argument("perfect matching needs an even vertex count");
    if (n_vertices == 0)
        return py::array_t<int>(0);
    auto e = edges.unchecked<2>();
    auto w = weights.unchecked<1>();
    ssize_t m = e.shape(0);
    if (weights.shape(0) != m)
        throw std::invalid_argument("edges and weights length mismatch");
    long long wmax = 0;
    for (ssize_t i = 0; i < m; i++)
        wmax = std::max(wmax, w(i));
    Matcher M(n_vertices);
    for (ssize_t i = 0; i < m; i++) {
        int a = e(i, 0), b = e(i, 1);
        if (a == b || a < 0 || b < 0 || a >= n_vertices || b >= n_vertices)
            throw std::invalid_argument("bad edge endpoint");
        // Negate (shift) weights: maximizing wmax - w minimizes total weight
        // over perfect matchings.
        long long wt = wmax - w(i);
        if (!M.adj[a][b]) {
            M.adj[a][b] = M.adj[b][a] = true;
            M.nbr[a].push_back(b);
            M.nbr[b].push_back(a);
            M.wmat[a][b] = M.wmat[b][a] = wt;
        } else {
            M.wmat[a][b] = M.wmat[b][a] = std::max(M.wmat[a][b], wt);
        }
    }
    M.solve();
    std::vector<int> out;
    out.reserve(n_vertices);
    for (int v = 0; v < n_vertices; v++) {
        if (M.mate[v] == -1)
            throw std::runtime_error("no perfect matching exists on the given graph");
        if (v < M.mate[v]) {
            out.push_back(v);
            out.push_back(M.mate[v]);
        }
    }
    py::array_t<int> res((ssize_t)out.size());
    auto r = res.mutable_unchecked<1>();
    for (size_t i = 0; i < out.size(); i++)
        r(i) = out[i];
    return res;
}

PYBIND11_MODULE(_mwpm, mod) {
    mod.doc() = "exact blossom minimum-weight perfect matching";
    mod.def("min_weight_perfect_matching", &min_weight_perfect_matching,
            py::arg("n_vertices"), py::arg("edges"), py::arg("weights"));
}
