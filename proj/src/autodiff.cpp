#include "radtag/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace radtag::ad {
namespace {

constexpr double kProbClamp = 1e-12;

Var make(OpKind kind, Tensor value, std::vector<Var> parents) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->v = std::move(value);
    n->parents = std::move(parents);
    for (const auto& p : n->parents)
        if (p->requires_grad) n->requires_grad = true;
    return n;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (a->v.shape != b->v.shape)
        throw DimensionMismatch(std::string(op) + ": shape mismatch");
}

}  // namespace

Var leaf(Tensor value, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->v = std::move(value);
    n->requires_grad = requires_grad;
    return n;
}

Var add(Var a, Var b) {
    check_same_shape(a, b, "add");
    Tensor out = a->v;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b->v.data[i];
    Var n = make(OpKind::Add, std::move(out), {a, b});
    Node* np = n.get();
    Node* ap = a.get();
    Node* bp = b.get();
    n->back = [np, ap, bp] {
        if (ap->requires_grad) {
            ap->ensure_grad();
            for (size_t i = 0; i < np->g.data.size(); ++i)
                ap->g.data[i] += np->g.data[i];
        }
        if (bp->requires_grad) {
            bp->ensure_grad();
            for (size_t i = 0; i < np->g.data.size(); ++i)
                bp->g.data[i] += np->g.data[i];
        }
    };
    return n;
}

Var mul(Var a, Var b) {
    check_same_shape(a, b, "mul");
    Tensor out = a->v;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b->v.data[i];
    Var n = make(OpKind::Mul, std::move(out), {a, b});
    Node* np = n.get();
    Node* ap = a.get();
    Node* bp = b.get();
    n->back = [np, ap, bp] {
        if (ap->requires_grad) {
            ap->ensure_grad();
            for (size_t i = 0; i < np->g.data.size(); ++i)
                ap->g.data[i] += np->g.data[i] * bp->v.data[i];
        }
        if (bp->requires_grad) {
            bp->ensure_grad();
            for (size_t i = 0; i < np->g.data.size(); ++i)
                bp->g.data[i] += np->g.data[i] * ap->v.data[i];
        }
    };
    return n;
}

Var scale(Var a, double c) {
    Tensor out = a->v;
    for (double& x : out.data) x *= c;
    Var n = make(OpKind::Scale, std::move(out), {a});
    Node* np = n.get();
    Node* ap = a.get();
    n->back = [np, ap, c] {
        if (!ap->requires_grad) return;
        ap->ensure_grad();
        for (size_t i = 0; i < np->g.data.size(); ++i)
            ap->g.data[i] += np->g.data[i] * c;
    };
    return n;
}

Var sigmoid(Var a) {
    Tensor out = a->v;
    for (double& x : out.data) {
        double s = 1.0 / (1.0 + std::exp(-x));
        x = std::min(1.0 - kProbClamp, std::max(kProbClamp, s));
    }
    Var n = make(OpKind::Sigmoid, std::move(out), {a});
    Node* np = n.get();
    Node* ap = a.get();
    n->back = [np, ap] {
        if (!ap->requires_grad) return;
        ap->ensure_grad();
        for (size_t i = 0; i < np->g.data.size(); ++i) {
            double s = np->v.data[i];
            ap->g.data[i] += np->g.data[i] * s * (1.0 - s);
        }
    };
    return n;
}

Var tanh_op(Var a) {
    Tensor out = a->v;
    for (double& x : out.data) x = std::tanh(x);
    Var n = make(OpKind::Tanh, std::move(out), {a});
    Node* np = n.get();
    Node* ap = a.get();
    n->back = [np, ap] {
        if (!ap->requires_grad) return;
        ap->ensure_grad();
        for (size_t i = 0; i < np->g.data.size(); ++i) {
            double t = np->v.data[i];
            ap->g.data[i] += np->g.data[i] * (1.0 - t * t);
        }
    };
    return n;
}

Var relu(Var a) {
    Tensor out = a->v;
    for (double& x : out.data) x = x > 0.0 ? x : 0.0;
    Var n = make(OpKind::Relu, std::move(out), {a});
    Node* np = n.get();
    Node* ap = a.get();
    n->back = [np, ap] {
        if (!ap->requires_grad) return;
        ap->ensure_grad();
        for (size_t i = 0; i < np->g.data.size(); ++i)
            if (np->v.data[i] > 0.0) ap->g.data[i] += np->g.data[i];
    };
    return n;
}

Var affine(Var W, Var x, Var b) {
    const size_t m = W->v.rows(), k = W->v.cols();
    if (x->v.size() != k || b->v.size() != m)
        throw DimensionMismatch("affine: shape mismatch");
    Tensor out({m});
    for (size_t i = 0; i < m; ++i) {
        double acc = b->v.data[i];
        const double* wrow = &W->v.data[i * k];
        for (size_t j = 0; j < k; ++j) acc += wrow[j] * x->v.data[j];
        out.data[i] = acc;
    }
    Var n = make(OpKind::Affine, std::move(out), {W, x, b});
    Node* np = n.get();
    Node* Wp = W.get();
    Node* xp = x.get();
    Node* bp = b.get();
    n->back = [np, Wp, xp, bp, m, k] {
        if (Wp->requires_grad) {
            Wp->ensure_grad();
            for (size_t i = 0; i < m; ++i) {
                double go = np->g.data[i];
                double* grow = &Wp->g.data[i * k];
                for (size_t j = 0; j < k; ++j)
                    grow[j] += go * xp->v.data[j];
            }
        }
        if (xp->requires_grad) {
            xp->ensure_grad();
            for (size_t i = 0; i < m; ++i) {
                double go = np->g.data[i];
                const double* wrow = &Wp->v.data[i * k];
                for (size_t j = 0; j < k; ++j)
                    xp->g.data[j] += go * wrow[j];
            }
        }
        if (bp->requires_grad) {
            bp->ensure_grad();
            for (size_t i = 0; i < m; ++i) bp->g.data[i] += np->g.data[i];
        }
    };
    return n;
}

Var affine2(Var Wx, Var x, Var Wh, Var h, Var b) {
    const size_t m = Wx->v.rows(), kx = Wx->v.cols(), kh = Wh->v.cols();
    if (Wh->v.rows() != m || x->v.size() != kx || h->v.size() != kh ||
        b->v.size() != m)
        throw DimensionMismatch("affine2: shape mismatch");
    Tensor out({m});
    for (size_t i = 0; i < m; ++i) {
        double acc = b->v.data[i];
        const double* wx = &Wx->v.data[i * kx];
        for (size_t j = 0; j < kx; ++j) acc += wx[j] * x->v.data[j];
        const double* wh = &Wh->v.data[i * kh];
        for (size_t j = 0; j < kh; ++j) acc += wh[j] * h->v.data[j];
        out.data[i] = acc;
    }
    Var n = make(OpKind::Affine2, std::move(out), {Wx, x, Wh, h, b});
    Node* np = n.get();
    Node* Wxp = Wx.get();
    Node* xp = x.get();
    Node* Whp = Wh.get();
    Node* hp = h.get();
    Node* bp = b.get();
    n->back = [np, Wxp, xp, Whp, hp, bp, m, kx, kh] {
        for (size_t i = 0; i < m; ++i) {
            const double go = np->g.data[i];
            if (go == 0.0) continue;
            if (Wxp->requires_grad) {
                Wxp->ensure_grad();
                double* grow = &Wxp->g.data[i * kx];
                for (size_t j = 0; j < kx; ++j)
                    grow[j] += go * xp->v.data[j];
            }
            if (xp->requires_grad) {
                xp->ensure_grad();
                const double* wx = &Wxp->v.data[i * kx];
                for (size_t j = 0; j < kx; ++j)
                    xp->g.data[j] += go * wx[j];
            }
            if (Whp->requires_grad) {
                Whp->ensure_grad();
                double* grow = &Whp->g.data[i * kh];
                for (size_t j = 0; j < kh; ++j)
                    grow[j] += go * hp->v.data[j];
            }
            if (hp->requires_grad) {
                hp->ensure_grad();
                const double* wh = &Whp->v.data[i * kh];
                for (size_t j = 0; j < kh; ++j)
                    hp->g.data[j] += go * wh[j];
            }
            if (bp->requires_grad) {
                bp->ensure_grad();
                bp->g.data[i] += go;
            }
        }
    };
    return n;
}

Var matmul_nt(Var A, Var B) {
    const size_t m = A->v.rows(), k = A->v.cols(), l = B->v.rows();
    if (B->v.cols() != k) throw DimensionMismatch("matmul_nt");
    Tensor out({m, l});
    for (size_t i = 0; i < m; ++i) {
        const double* arow = &A->v.data[i * k];
        for (size_t j = 0; j < l; ++j) {
            const double* brow = &B->v.data[j * k];
            double acc = 0.0;
            for (size_t t = 0; t < k; ++t) acc += arow[t] * brow[t];
            out.data[i * l + j] = acc;
        }
    }
    Var n = make(OpKind::MatmulNT, std::move(out), {A, B});
    Node* np = n.get();
    Node* Ap = A.get();
    Node* Bp = B.get();
    n->back = [np, Ap, Bp, m, k, l] {
        if (Ap->requires_grad) {
            Ap->ensure_grad();
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < l; ++j) {
                    const double go = np->g.data[i * l + j];
                    if (go == 0.0) continue;
                    const double* brow = &Bp->v.data[j * k];
                    double* garow = &Ap->g.data[i * k];
                    for (size_t t = 0; t < k; ++t) garow[t] += go * brow[t];
                }
        }
        if (Bp->requires_grad) {
            Bp->ensure_grad();
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < l; ++j) {
                    const double go = np->g.data[i * l + j];
                    if (go == 0.0) continue;
                    const double* arow = &Ap->v.data[i * k];
                    double* gbrow = &Bp->g.data[j * k];
                    for (size_t t = 0; t < k; ++t) gbrow[t] += go * arow[t];
                }
        }
    };
    return n;
}

Var matmul_tn(Var A, Var B) {
    const size_t m = A->v.rows(), k = A->v.cols(), nn = B->v.cols();
    if (B->v.rows() != m) throw DimensionMismatch("matmul_tn");
    Tensor out({k, nn});
    for (size_t r = 0; r < m; ++r) {
        const double* arow = &A->v.data[r * k];
        const double* brow = &B->v.data[r * nn];
        for (size_t i = 0; i < k; ++i) {
            const double a = arow[i];
            if (a == 0.0) continue;
            double* orow = &out.data[i * nn];
            for (size_t j = 0; j < nn; ++j) orow[j] += a * brow[j];
        }
    }
    Var n = make(OpKind::MatmulTN, std::move(out), {A, B});
    Node* np = n.get();
    Node* Ap = A.get();
    Node* Bp = B.get();
    n->back = [np, Ap, Bp, m, k, nn] {
        // C = A^T B ; dA = B dC^T (i.e., dA[r,i] = sum_j B[r,j] dC[i,j])
        if (Ap->requires_grad) {
            Ap->ensure_grad();
            for (size_t r = 0; r < m; ++r) {
                const double* brow = &Bp->v.data[r * nn];
                double* garow = &Ap->g.data[r * k];
                for (size_t i = 0; i < k; ++i) {
                    const double* gcrow = &np->g.data[i * nn];
                    double acc = 0.0;
                    for (size_t j = 0; j < nn; ++j) acc += brow[j] * gcrow[j];
                    garow[i] += acc;
                }
            }
        }
        // dB = A dC ; dB[r,j] = sum_i A[r,i] dC[i,j]
        if (Bp->requires_grad) {
            Bp->ensure_grad();
            for (size_t r = 0; r < m; ++r) {
                const double* arow = &Ap->v.data[r * k];
                double* gbrow = &Bp->g.data[r * nn];
                for (size_t i = 0; i < k; ++i) {
                    const double a = arow[i];
                    if (a == 0.0) continue;
                    const double* gcrow = &np->g.data[i * nn];
                    for (size_t j = 0; j < nn; ++j) gbrow[j] += a * gcrow[j];
                }
            }
        }
    };
    return n;
}

Var rowdot(Var A, Var B) {
    const size_t l = A->v.rows(), d = A->v.cols();
    if (B->v.rows() != d || B->v.cols() != l)
        throw DimensionMismatch("rowdot");
    Tensor out({l});
    for (size_t i = 0; i < l; ++i) {
        const double* arow = &A->v.data[i * d];
        double acc = 0.0;
        for (size_t t = 0; t < d; ++t) acc += arow[t] * B->v.data[t * l + i];
        out.data[i] = acc;
    }
    Var n = make(OpKind::RowDot, std::move(out), {A, B});
    Node* np = n.get();
    Node* Ap = A.get();
    Node* Bp = B.get();
    n->back = [np, Ap, Bp, l, d] {
        for (size_t i = 0; i < l; ++i) {
            const double go = np->g.data[i];
            if (go == 0.0) continue;
            if (Ap->requires_grad) {
                Ap->ensure_grad();
                double* garow = &Ap->g.data[i * d];
                for (size_t t = 0; t < d; ++t)
                    garow[t] += go * Bp->v.data[t * l + i];
            }
            if (Bp->requires_grad) {
                Bp->ensure_grad();
                const double* arow = &Ap->v.data[i * d];
                for (size_t t = 0; t < d; ++t)
                    Bp->g.data[t * l + i] += go * arow[t];
            }
        }
    };
    return n;
}

Var softmax_cols(Var S) {
    const size_t m = S->v.rows(), l = S->v.cols();
    Tensor out({m, l});
    for (size_t j = 0; j < l; ++j) {
        double mx = -1e300;
        for (size_t i = 0; i < m; ++i)
            mx = std::max(mx, S->v.data[i * l + j]);
        double sum = 0.0;
        for (size_t i = 0; i < m; ++i) {
            double e = std::exp(S->v.data[i * l + j] - mx);
            out.data[i * l + j] = e;
            sum += e;
        }
        for (size_t i = 0; i < m; ++i) out.data[i * l + j] /= sum;
    }
    Var n = make(OpKind::SoftmaxCols, std::move(out), {S});
    Node* np = n.get();
    Node* Sp = S.get();
    n->back = [np, Sp, m, l] {
        if (!Sp->requires_grad) return;
        Sp->ensure_grad();
        for (size_t j = 0; j < l; ++j) {
            double dot = 0.0;
            for (size_t i = 0; i < m; ++i)
                dot += np->v.data[i * l + j] * np->g.data[i * l + j];
            for (size_t i = 0; i < m; ++i) {
                const double a = np->v.data[i * l + j];
                Sp->g.data[i * l + j] += a * (np->g.data[i * l + j] - dot);
            }
        }
    };
    return n;
}

Var softmax_vec(Var x) {
    const size_t n_elems = x->v.size();
    Tensor out({n_elems});
    double mx = -1e300;
    for (double v : x->v.data) mx = std::max(mx, v);
    double sum = 0.0;
    for (size_t i = 0; i < n_elems; ++i) {
        out.data[i] = std::exp(x->v.data[i] - mx);
        sum += out.data[i];
    }
    for (double& v : out.data) v /= sum;
    Var n = make(OpKind::SoftmaxVec, std::move(out), {x});
    Node* np = n.get();
    Node* xp = x.get();
    n->back = [np, xp] {
        if (!xp->requires_grad) return;
        xp->ensure_grad();
        double dot = 0.0;
        for (size_t i = 0; i < np->v.data.size(); ++i)
            dot += np->v.data[i] * np->g.data[i];
        for (size_t i = 0; i < np->v.data.size(); ++i)
            xp->g.data[i] += np->v.data[i] * (np->g.data[i] - dot);
    };
    return n;
}

Var slice(Var x, size_t offset, size_t len) {
    if (offset + len > x->v.size()) throw DimensionMismatch("slice");
    Tensor out({len});
    std::copy(x->v.data.begin() + static_cast<long>(offset),
              x->v.data.begin() + static_cast<long>(offset + len),
              out.data.begin());
    Var n = make(OpKind::Slice, std::move(out), {x});
    Node* np = n.get();
    Node* xp = x.get();
    n->back = [np, xp, offset, len] {
        if (!xp->requires_grad) return;
        xp->ensure_grad();
        for (size_t i = 0; i < len; ++i)
            xp->g.data[offset + i] += np->g.data[i];
    };
    return n;
}

Var concat(Var a, Var b) {
    const size_t na = a->v.size(), nb = b->v.size();
    Tensor out({na + nb});
    std::copy(a->v.data.begin(), a->v.data.end(), out.data.begin());
    std::copy(b->v.data.begin(), b->v.data.end(),
              out.data.begin() + static_cast<long>(na));
    Var n = make(OpKind::Concat, std::move(out), {a, b});
    Node* np = n.get();
    Node* ap = a.get();
    Node* bp = b.get();
    n->back = [np, ap, bp, na, nb] {
        if (ap->requires_grad) {
            ap->ensure_grad();
            for (size_t i = 0; i < na; ++i) ap->g.data[i] += np->g.data[i];
        }
        if (bp->requires_grad) {
            bp->ensure_grad();
            for (size_t i = 0; i < nb; ++i)
                bp->g.data[i] += np->g.data[na + i];
        }
    };
    return n;
}

Var stack_rows(const std::vector<Var>& rows) {
    if (rows.empty()) throw DimensionMismatch("stack_rows: empty");
    const size_t d = rows[0]->v.size();
    Tensor out({rows.size(), d});
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i]->v.size() != d) throw DimensionMismatch("stack_rows");
        std::copy(rows[i]->v.data.begin(), rows[i]->v.data.end(),
                  out.data.begin() + static_cast<long>(i * d));
    }
    Var n = make(OpKind::StackRows, std::move(out), rows);
    Node* np = n.get();
    std::vector<Node*> raw;
    raw.reserve(rows.size());
    for (const auto& r : rows) raw.push_back(r.get());
    n->back = [np, raw, d] {
        for (size_t i = 0; i < raw.size(); ++i) {
            if (!raw[i]->requires_grad) continue;
            raw[i]->ensure_grad();
            for (size_t j = 0; j < d; ++j)
                raw[i]->g.data[j] += np->g.data[i * d + j];
        }
    };
    return n;
}

Var row(Var X, size_t i) {
    const size_t c = X->v.cols();
    if (i >= X->v.rows()) throw DimensionMismatch("row");
    Tensor out({c});
    std::copy(X->v.data.begin() + static_cast<long>(i * c),
              X->v.data.begin() + static_cast<long>((i + 1) * c),
              out.data.begin());
    Var n = make(OpKind::Row, std::move(out), {X});
    Node* np = n.get();
    Node* Xp = X.get();
    n->back = [np, Xp, i, c] {
        if (!Xp->requires_grad) return;
        Xp->ensure_grad();
        for (size_t j = 0; j < c; ++j)
            Xp->g.data[i * c + j] += np->g.data[j];
    };
    return n;
}

Var flatten(Var X) {
    Tensor out({X->v.size()});
    out.data = X->v.data;
    Var n = make(OpKind::Flatten, std::move(out), {X});
    Node* np = n.get();
    Node* Xp = X.get();
    n->back = [np, Xp] {
        if (!Xp->requires_grad) return;
        Xp->ensure_grad();
        for (size_t i = 0; i < np->g.data.size(); ++i)
            Xp->g.data[i] += np->g.data[i];
    };
    return n;
}

Var conv1d(Var X, Var W, Var b, size_t kernel) {
    const size_t n_in = X->v.rows(), din = X->v.cols();
    const size_t f = W->v.shape[0];
    if (W->v.shape.size() != 3 || W->v.shape[1] != kernel ||
        W->v.shape[2] != din || b->v.size() != f || n_in < kernel)
        throw DimensionMismatch("conv1d");
    const size_t n_out = n_in - kernel + 1;
    Tensor out({n_out, f});
    const size_t wstride = kernel * din;
    for (size_t t = 0; t < n_out; ++t) {
        for (size_t o = 0; o < f; ++o) {
            double acc = b->v.data[o];
            const double* w = &W->v.data[o * wstride];
            const double* x = &X->v.data[t * din];
            for (size_t j = 0; j < kernel * din; ++j) acc += w[j] * x[j];
            out.data[t * f + o] = acc;
        }
    }
    Var n = make(OpKind::Conv1d, std::move(out), {X, W, b});
    Node* np = n.get();
    Node* Xp = X.get();
    Node* Wp = W.get();
    Node* bp = b.get();
    n->back = [np, Xp, Wp, bp, n_out, f, din, kernel, wstride] {
        for (size_t t = 0; t < n_out; ++t) {
            for (size_t o = 0; o < f; ++o) {
                const double go = np->g.data[t * f + o];
                if (go == 0.0) continue;
                if (Wp->requires_grad) {
                    Wp->ensure_grad();
                    double* gw = &Wp->g.data[o * wstride];
                    const double* x = &Xp->v.data[t * din];
                    for (size_t j = 0; j < kernel * din; ++j)
                        gw[j] += go * x[j];
                }
                if (Xp->requires_grad) {
                    Xp->ensure_grad();
                    const double* w = &Wp->v.data[o * wstride];
                    double* gx = &Xp->g.data[t * din];
                    for (size_t j = 0; j < kernel * din; ++j)
                        gx[j] += go * w[j];
                }
                if (bp->requires_grad) {
                    bp->ensure_grad();
                    bp->g.data[o] += go;
                }
            }
        }
    };
    return n;
}

Var maxpool_time(Var X, size_t kernel, size_t stride) {
    const size_t n_in = X->v.rows(), c = X->v.cols();
    if (kernel == 0 || stride == 0 || n_in < kernel)
        throw DimensionMismatch("maxpool_time");
    const size_t n_out = (n_in - kernel) / stride + 1;
    Tensor out({n_out, c});
    auto argmax = std::make_shared<std::vector<size_t>>(n_out * c);
    for (size_t p = 0; p < n_out; ++p) {
        for (size_t j = 0; j < c; ++j) {
            size_t best = p * stride;
            double bv = X->v.data[best * c + j];
            for (size_t t = 1; t < kernel; ++t) {
                size_t idx = (p * stride + t);
                double v = X->v.data[idx * c + j];
                if (v > bv) {
                    bv = v;
                    best = idx;
                }
            }
            out.data[p * c + j] = bv;
            (*argmax)[p * c + j] = best;
        }
    }
    Var n = make(OpKind::MaxPoolTime, std::move(out), {X});
    Node* np = n.get();
    Node* Xp = X.get();
    n->back = [np, Xp, argmax, n_out, c] {
        if (!Xp->requires_grad) return;
        Xp->ensure_grad();
        for (size_t p = 0; p < n_out; ++p)
            for (size_t j = 0; j < c; ++j)
                Xp->g.data[(*argmax)[p * c + j] * c + j] +=
                    np->g.data[p * c + j];
    };
    return n;
}

Var mask(Var x, Tensor m) {
    if (x->v.shape != m.shape) throw DimensionMismatch("mask");
    Tensor out = x->v;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= m.data[i];
    Var n = make(OpKind::Mask, std::move(out), {x});
    Node* np = n.get();
    Node* xp = x.get();
    auto mk = std::make_shared<Tensor>(std::move(m));
    n->back = [np, xp, mk] {
        if (!xp->requires_grad) return;
        xp->ensure_grad();
        for (size_t i = 0; i < np->g.data.size(); ++i)
            xp->g.data[i] += np->g.data[i] * mk->data[i];
    };
    return n;
}

Var bce_sum(Var probs, Tensor targets) {
    if (targets.size() != probs->v.size())
        throw DimensionMismatch("bce_sum: target length mismatch");
    double loss = 0.0;
    for (size_t i = 0; i < targets.size(); ++i) {
        const double p = probs->v.data[i];
        const double y = targets.data[i];
        loss -= y * std::log(std::max(p, kProbClamp)) +
                (1.0 - y) * std::log(std::max(1.0 - p, kProbClamp));
    }
    const bool fused =
        probs->kind == OpKind::Sigmoid && probs->parents.size() == 1;
    Var parent = fused ? probs->parents[0] : probs;
    Var n = make(OpKind::BceSum, Tensor::scalar(loss), {parent, probs});
    Node* np = n.get();
    Node* pp = parent.get();
    Node* probsp = probs.get();
    auto ts = std::make_shared<Tensor>(std::move(targets));
    n->back = [np, pp, probsp, ts, fused] {
        if (!pp->requires_grad) return;
        pp->ensure_grad();
        const double go = np->g.data[0];
        for (size_t i = 0; i < ts->size(); ++i) {
            const double p = probsp->v.data[i];
            const double y = ts->data[i];
            if (fused) {
                pp->g.data[i] += go * (p - y);
            } else {
                double d = 0.0;
                if (p > kProbClamp) d -= y / p;
                if (1.0 - p > kProbClamp) d += (1.0 - y) / (1.0 - p);
                pp->g.data[i] += go * d;
            }
        }
    };
    return n;
}

Var sum_sq(Var x) {
    double s = 0.0;
    for (double v : x->v.data) s += v * v;
    Var n = make(OpKind::SumSq, Tensor::scalar(s), {x});
    Node* np = n.get();
    Node* xp = x.get();
    n->back = [np, xp] {
        if (!xp->requires_grad) return;
        xp->ensure_grad();
        const double go = np->g.data[0];
        for (size_t i = 0; i < xp->v.data.size(); ++i)
            xp->g.data[i] += go * 2.0 * xp->v.data[i];
    };
    return n;
}

void backward(const Var& root) {
    if (root->v.size() != 1)
        throw DimensionMismatch("backward requires a scalar root");
    if (!root->requires_grad) return;
    // iterative DFS post-order over parents
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    struct Frame {
        Node* node;
        size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({root.get(), 0});
    visited.insert(root.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            Node* p = f.node->parents[f.next_parent++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    root->ensure_grad();
    root->g.data[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->back && node->requires_grad) {
            node->ensure_grad();
            node->back();
        }
    }
}

}  // namespace radtag::ad
