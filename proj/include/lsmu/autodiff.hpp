#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "lsmu/errors.hpp"
#include "lsmu/tensor.hpp"

namespace lsmu::ad {

class Tape;

// Handle into a tape. Cheap to copy; the tape owns all storage.
struct Var {
    Tape* tape = nullptr;
    std::int32_t id = -1;
};

// Reverse-mode tape. Nodes are appended in evaluation order, which is a
// topological order by construction, so the backward pass is a single sweep
// from the root down that fires each touched node exactly once. Backward
// rules capture their parent ids; a node whose gradient was never touched is
// not on any path to the root and is skipped.
//
// One tape per loss evaluation. Independent tapes may live on independent
// threads; a single tape is not thread-safe.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::int32_t self)>;

    struct Node {
        Tensor value;
        Tensor grad;  // allocated on first touch during backward
        BackwardFn backward;
    };

    Var leaf(Tensor value) {
        nodes_.push_back(Node{std::move(value), Tensor{}, nullptr});
        return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
    }

    Var node(Tensor value, BackwardFn back) {
        nodes_.push_back(Node{std::move(value), Tensor{}, std::move(back)});
        return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
    }

    const Tensor& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
    const Tensor& value(std::int32_t id) const { return nodes_[static_cast<std::size_t>(id)].value; }

    // Gradient of the last backward() root with respect to v. Zero tensor if
    // v does not influence the root.
    const Tensor& grad(Var v) { return grad_ref(v.id); }

    Tensor& grad_ref(std::int32_t id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.grad.data.empty()) n.grad = Tensor::zeros(n.value.shape);
        return n.grad;
    }

    void backward(Var root) {
        if (root.tape != this) throw ConfigError("backward: var from another tape");
        if (value(root).size() != 1) throw ConfigError("backward: root must be scalar");
        grad_ref(root.id).data[0] = 1.0;
        for (std::int32_t id = root.id; id >= 0; --id) {
            Node& n = nodes_[static_cast<std::size_t>(id)];
            if (n.grad.data.empty() || !n.backward) continue;
            n.backward(*this, id);
        }
    }

    std::size_t num_nodes() const { return nodes_.size(); }

private:
    std::vector<Node> nodes_;
};

namespace detail {

inline Tape& tape_of(Var a) {
    if (!a.tape) throw ConfigError("op on detached var");
    return *a.tape;
}

inline Tape& tape_of(Var a, Var b) {
    if (a.tape != b.tape || !a.tape) throw ConfigError("op on vars from different tapes");
    return *a.tape;
}

}  // namespace detail

// ---- elementwise -----------------------------------------------------------

inline Var add(Var a, Var b) {
    Tape& t = detail::tape_of(a, b);
    const Tensor &va = t.value(a), &vb = t.value(b);
    check_same_shape(va, vb, "add");
    Tensor out = va;
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] += vb[i];
    const auto pa = a.id, pb = b.id;
    return t.node(std::move(out), [pa, pb](Tape& tp, std::int32_t self) {
        const Tensor& g = tp.grad_ref(self);
        Tensor& ga = tp.grad_ref(pa);
        for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        Tensor& gb = tp.grad_ref(pb);
        for (std::int64_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    });
}

inline Var sub(Var a, Var b) {
    Tape& t = detail::tape_of(a, b);
    const Tensor &va = t.value(a), &vb = t.value(b);
    check_same_shape(va, vb, "sub");
    Tensor out = va;
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] -= vb[i];
    const auto pa = a.id, pb = b.id;
    return t.node(std::move(out), [pa, pb](Tape& tp, std::int32_t self) {
        const Tensor& g = tp.grad_ref(self);
        Tensor& ga = tp.grad_ref(pa);
        for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        Tensor& gb = tp.grad_ref(pb);
        for (std::int64_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    });
}

inline Var mul(Var a, Var b) {
    Tape& t = detail::tape_of(a, b);
    const Tensor &va = t.value(a), &vb = t.value(b);
    check_same_shape(va, vb, "mul");
    Tensor out = va;
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
    const auto pa = a.id, pb = b.id;
    return t.node(std::move(out), [pa, pb](Tape& tp, std::int32_t self) {
        const Tensor& g = tp.grad_ref(self);
        const Tensor& va2 = tp.value(pa);
        const Tensor& vb2 = tp.value(pb);
        Tensor& ga = tp.grad_ref(pa);
        for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb2[i];
        Tensor& gb = tp.grad_ref(pb);
        for (std::int64_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va2[i];
    });
}

// alpha * a + beta, elementwise.
inline Var scale_add(Var a, double alpha, double beta) {
    Tape& t = detail::tape_of(a);
    Tensor out = t.value(a);
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = alpha * out[i] + beta;
    const auto pa = a.id;
    return t.node(std::move(out), [pa, alpha](Tape& tp, std::int32_t self) {
        const Tensor& g = tp.grad_ref(self);
        Tensor& ga = tp.grad_ref(pa);
        for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += alpha * g[i];
    });
}

inline Var relu(Var a) {
    Tape& t = detail::tape_of(a);
    Tensor out = t.value(a);
    for (auto& v : out.data) v = v > 0.0 ? v : 0.0;
    const auto pa = a.id;
    return t.node(std::move(out), [pa](Tape& tp, std::int32_t self) {
        const Tensor& g = tp.grad_ref(self);
        const Tensor& va = tp.value(pa);
        Tensor& ga = tp.grad_ref(pa);
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (va[i] > 0.0) ga[i] += g[i];
    });
}

inline Var exp(Var a) {
    Tape& t = detail::tape_of(a);
    Tensor out = t.value(a);
    for (auto& v : out.data) v = std::exp(v);
    const auto pa = a.id;
    return t.node(std::move(out), [pa](Tape& tp, std::int32_t self) {
        const Tensor& g = tp.grad_ref(self);
        const Tensor& out2 = tp.value(self);
        Tensor& ga = tp.grad_ref(pa);
        for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * out2[i];
    });
}

inline Var log(Var a) {
    Tape& t = detail::tape_of(a);
    Tensor out = t.value(a);
    for (auto& v : out.data) {
        if (v <= 0.0) throw NumericError("log: non-positive input");
        v = std::log(v);
    }
    const auto pa = a.id;
    return t.node(std::move(out), [pa](Tape& tp, std::int32_t self) {
        const Tensor& g = tp.grad_ref(self);
        const Tensor& va = tp.value(pa);
        Tensor& ga = tp.grad_ref(pa);
        for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] / va[i];
    });
}

// ---- reductions & shape ----------------------------------------------------

inline Var sum(Var a) {
    Tape& t = detail::tape_of(a);
    const Tensor& va = t.value(a);
    double s = 0.0;
    for (double v : va.data) s += v;
    const auto pa = a.id;
    return t.node(Tensor::scalar(s), [pa](Tape& tp, std::int32_t self) {
        const double g = tp.grad_ref(self)[0];
        Tensor& ga = tp.grad_ref(pa);
        for (auto& v : ga.data) v += g;
    });
}

inline Var mean(Var a) {
    Tape& t = detail::tape_of(a);
    const Tensor& va = t.value(a);
    if (va.size() == 0) throw ConfigError("mean of empty tensor");
    const double inv = 1.0 / static_cast<double>(va.size());
    double s = 0.0;
    for (double v : va.data) s += v;
    const auto pa = a.id;
    return t.node(Tensor::scalar(s * inv), [pa, inv](Tape& tp, std::int32_t self) {
        const double g = tp.grad_ref(self)[0] * inv;
        Tensor& ga = tp.grad_ref(pa);
        for (auto& v : ga.data) v += g;
    });
}

inline Var reshape(Var a, std::vector<std::int64_t> shape) {
    Tape& t = detail::tape_of(a);
    const Tensor& va = t.value(a);
    if (Tensor::numel(shape) != va.size())
        throw ConfigError("reshape: element count mismatch");
    Tensor out(std::move(shape), va.data);
    const auto pa = a.id;
    return t.node(std::move(out), [pa](Tape& tp, std::int32_t self) {
        const Tensor& g = tp.grad_ref(self);
        Tensor& ga = tp.grad_ref(pa);
        for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
}

// Slice along the leading axis: rows [begin, end) of a rank-1 or rank-2 tensor.
inline Var slice0(Var a, std::int64_t begin, std::int64_t end) {
    Tape& t = detail::tape_of(a);
    const Tensor& va = t.value(a);
    if (va.rank() < 1 || va.rank() > 2) throw ConfigError("slice0: rank must be 1 or 2");
    if (begin < 0 || end > va.shape[0] || begin >= end) throw ConfigError("slice0: bad range");
    const std::int64_t inner = va.rank() == 2 ? va.shape[1] : 1;
    std::vector<std::int64_t> shape = va.shape;
    shape[0] = end - begin;
    Tensor out(shape);
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = va[begin * inner + i];
    const auto pa = a.id;
    return t.node(std::move(out), [pa, begin, inner](Tape& tp, std::int32_t self) {
        const Tensor& g = tp.grad_ref(self);
        Tensor& ga = tp.grad_ref(pa);
        for (std::int64_t i = 0; i < g.size(); ++i) ga[begin * inner + i] += g[i];
    });
}

// ---- linear algebra --------------------------------------------------------

// A {m,n} times B {n,p} -> {m,p}, or A {m,n} times v {n} -> {m}.
inline Var matmul(Var a, Var b) {
    Tape& t = detail::tape_of(a, b);
    const Tensor &va = t.value(a), &vb = t.value(b);
    if (va.rank() != 2) throw ConfigError("matmul: lhs must be rank 2");
    if (vb.rank() != 1 && vb.rank() != 2) throw ConfigError("matmul: rhs must be rank 1 or 2");
    const std::int64_t m = va.shape[0], n = va.shape[1];
    const bool vec = vb.rank() == 1;
    const std::int64_t p = vec ? 1 : vb.shape[1];
    if (vb.shape[0] != n)
        throw ConfigError("matmul: inner dimension mismatch " + va.shape_str() + " vs " + vb.shape_str());

    Tensor out(vec ? std::vector<std::int64_t>{m} : std::vector<std::int64_t>{m, p});
    {
        const double* A = va.data.data();
        const double* B = vb.data.data();
        double* C = out.data.data();
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t k = 0; k < n; ++k) {
                const double aik = A[i * n + k];
                for (std::int64_t j = 0; j < p; ++j) C[i * p + j] += aik * B[k * p + j];
            }
    }
    const auto pa = a.id, pb = b.id;
    return t.node(std::move(out), [pa, pb, m, n, p](Tape& tp, std::int32_t self) {
        const Tensor& g = tp.grad_ref(self);
        const Tensor& va2 = tp.value(pa);
        const Tensor& vb2 = tp.value(pb);
        const double* G = g.data.data();
        const double* A = va2.data.data();
        const double* B = vb2.data.data();
        {
            Tensor& ga = tp.grad_ref(pa);
            double* GA = ga.data.data();
            // dA = G * B^T
            for (std::int64_t i = 0; i < m; ++i)
                for (std::int64_t j = 0; j < p; ++j) {
                    const double gij = G[i * p + j];
                    for (std::int64_t k = 0; k < n; ++k) GA[i * n + k] += gij * B[k * p + j];
                }
        }
        {
            Tensor& gb = tp.grad_ref(pb);
            double* GB = gb.data.data();
            // dB = A^T * G
            for (std::int64_t i = 0; i < m; ++i)
                for (std::int64_t k = 0; k < n; ++k) {
                    const double aik = A[i * n + k];
                    for (std::int64_t j = 0; j < p; ++j) GB[k * p + j] += aik * G[i * p + j];
                }
        }
    });
}

// ---- 1-D convolution --------------------------------------------------------

namespace detail {

// Valid output range for out[t] reading in[t*stride + off], in length L,
// out length Lout.
inline std::pair<std::int64_t, std::int64_t> conv_t_range(std::int64_t off, std::int64_t stride,
                                                          std::int64_t L, std::int64_t Lout) {
    std::int64_t tlo = 0;
    if (off < 0) tlo = (-off + stride - 1) / stride;
    std::int64_t thi = off > L - 1 ? -1 : (L - 1 - off) / stride;
    if (thi > Lout - 1) thi = Lout - 1;
    return {tlo, thi};
}

}  // namespace detail

// x {Cin,L}, w {Cout,Cin,K}, b {Cout} -> {Cout,Lout} with zero padding.
// Explicit sliding window; sizes here are small enough that FFT would not pay.
inline Var conv1d(Var x, Var w, Var b, std::int64_t stride = 1, std::int64_t pad = 0) {
    Tape& t = detail::tape_of(x, w);
    (void)detail::tape_of(x, b);
    const Tensor &vx = t.value(x), &vw = t.value(w), &vb = t.value(b);
    if (vx.rank() != 2 || vw.rank() != 3 || vb.rank() != 1)
        throw ConfigError("conv1d: expected x{C,L}, w{Cout,Cin,K}, b{Cout}");
    const std::int64_t Cin = vx.shape[0], L = vx.shape[1];
    const std::int64_t Cout = vw.shape[0], K = vw.shape[2];
    if (vw.shape[1] != Cin) throw ConfigError("conv1d: channel mismatch");
    if (vb.shape[0] != Cout) throw ConfigError("conv1d: bias size mismatch");
    if (stride < 1) throw ConfigError("conv1d: stride must be >= 1");
    const std::int64_t Lout = (L + 2 * pad - K) / stride + 1;
    if (Lout < 1) throw ConfigError("conv1d: empty output");

    Tensor out({Cout, Lout});
    {
        const double* X = vx.data.data();
        const double* W = vw.data.data();
        double* Y = out.data.data();
        for (std::int64_t oc = 0; oc < Cout; ++oc) {
            const double bias = vb[oc];
            for (std::int64_t tt = 0; tt < Lout; ++tt) Y[oc * Lout + tt] = bias;
            for (std::int64_t ic = 0; ic < Cin; ++ic)
                for (std::int64_t k = 0; k < K; ++k) {
                    const double wv = W[(oc * Cin + ic) * K + k];
                    const std::int64_t off = k - pad;
                    const auto [tlo, thi] = detail::conv_t_range(off, stride, L, Lout);
                    const std::int64_t xbase = ic * L + off;
                    double* yr = Y + oc * Lout;
                    for (std::int64_t tt = tlo; tt <= thi; ++tt) yr[tt] += wv * X[xbase + tt * stride];
                }
        }
    }
    const auto px = x.id, pw = w.id, pb = b.id;
    return t.node(std::move(out), [px, pw, pb, Cin, L, Cout, K, stride, pad, Lout](
                                      Tape& tp, std::int32_t self) {
        const Tensor& g = tp.grad_ref(self);
        const double* G = g.data.data();
        const Tensor& vx2 = tp.value(px);
        const Tensor& vw2 = tp.value(pw);
        {
            Tensor& gb = tp.grad_ref(pb);
            for (std::int64_t oc = 0; oc < Cout; ++oc) {
                double s = 0.0;
                for (std::int64_t tt = 0; tt < Lout; ++tt) s += G[oc * Lout + tt];
                gb[oc] += s;
            }
        }
        {
            Tensor& gx = tp.grad_ref(px);
            Tensor& gw = tp.grad_ref(pw);
            double* GX = gx.data.data();
            double* GW = gw.data.data();
            const double* X = vx2.data.data();
            const double* W = vw2.data.data();
            for (std::int64_t oc = 0; oc < Cout; ++oc)
                for (std::int64_t ic = 0; ic < Cin; ++ic)
                    for (std::int64_t k = 0; k < K; ++k) {
                        const double wv = W[(oc * Cin + ic) * K + k];
                        const std::int64_t off = k - pad;
                        const auto [tlo, thi] = detail::conv_t_range(off, stride, L, Lout);
                        const double* gr = G + oc * Lout;
                        const std::int64_t xbase = ic * L + off;
                        double wacc = 0.0;
                        for (std::int64_t tt = tlo; tt <= thi; ++tt) {
                            GX[xbase + tt * stride] += wv * gr[tt];
                            wacc += X[xbase + tt * stride] * gr[tt];
                        }
                        GW[(oc * Cin + ic) * K + k] += wacc;
                    }
        }
    });
}

// x {Cin,L}, w {Cin,Cout,K}, b {Cout} -> {Cout,Lout},
// Lout = (L-1)*stride - 2*pad + K + out_pad. Adjoint of conv1d.
inline Var transposed_conv1d(Var x, Var w, Var b, std::int64_t stride = 1, std::int64_t pad = 0,
                             std::int64_t out_pad = 0) {
    Tape& t = detail::tape_of(x, w);
    (void)detail::tape_of(x, b);
    const Tensor &vx = t.value(x), &vw = t.value(w), &vb = t.value(b);
    if (vx.rank() != 2 || vw.rank() != 3 || vb.rank() != 1)
        throw ConfigError("transposed_conv1d: expected x{C,L}, w{Cin,Cout,K}, b{Cout}");
    const std::int64_t Cin = vx.shape[0], L = vx.shape[1];
    const std::int64_t Cout = vw.shape[1], K = vw.shape[2];
    if (vw.shape[0] != Cin) throw ConfigError("transposed_conv1d: channel mismatch");
    if (vb.shape[0] != Cout) throw ConfigError("transposed_conv1d: bias size mismatch");
    if (stride < 1) throw ConfigError("transposed_conv1d: stride must be >= 1");
    const std::int64_t Lout = (L - 1) * stride - 2 * pad + K + out_pad;
    if (Lout < 1) throw ConfigError("transposed_conv1d: empty output");

    Tensor out({Cout, Lout});
    {
        const double* X = vx.data.data();
        const double* W = vw.data.data();
        double* Y = out.data.data();
        for (std::int64_t oc = 0; oc < Cout; ++oc) {
            const double bias = vb[oc];
            for (std::int64_t j = 0; j < Lout; ++j) Y[oc * Lout + j] = bias;
        }
        for (std::int64_t ic = 0; ic < Cin; ++ic)
            for (std::int64_t oc = 0; oc < Cout; ++oc)
                for (std::int64_t k = 0; k < K; ++k) {
                    const double wv = W[(ic * Cout + oc) * K + k];
                    const std::int64_t off = k - pad;
                    // y[t*stride + off] += w * x[t]; valid t range mirrors conv.
                    const auto [tlo, thi] = detail::conv_t_range(off, stride, Lout, L);
                    const std::int64_t ybase = oc * Lout + off;
                    const double* xr = X + ic * L;
                    for (std::int64_t tt = tlo; tt <= thi; ++tt) Y[ybase + tt * stride] += wv * xr[tt];
                }
    }
    const auto px = x.id, pw = w.id, pb = b.id;
    return t.node(std::move(out), [px, pw, pb, Cin, L, Cout, K, stride, pad, Lout](
                                      Tape& tp, std::int32_t self) {
        const Tensor& g = tp.grad_ref(self);
        const double* G = g.data.data();
        const Tensor& vx2 = tp.value(px);
        const Tensor& vw2 = tp.value(pw);
        {
            Tensor& gb = tp.grad_ref(pb);
            for (std::int64_t oc = 0; oc < Cout; ++oc) {
                double s = 0.0;
                for (std::int64_t j = 0; j < Lout; ++j) s += G[oc * Lout + j];
                gb[oc] += s;
            }
        }
        {
            Tensor& gx = tp.grad_ref(px);
            Tensor& gw = tp.grad_ref(pw);
            double* GX = gx.data.data();
            double* GW = gw.data.data();
            const double* X = vx2.data.data();
            const double* W = vw2.data.data();
            for (std::int64_t ic = 0; ic < Cin; ++ic)
                for (std::int64_t oc = 0; oc < Cout; ++oc)
                    for (std::int64_t k = 0; k < K; ++k) {
                        const double wv = W[(ic * Cout + oc) * K + k];
                        const std::int64_t off = k - pad;
                        const auto [tlo, thi] = detail::conv_t_range(off, stride, Lout, L);
                        const std::int64_t gbase = oc * Lout + off;
                        double* gxr = GX + ic * L;
                        const double* xr = X + ic * L;
                        double wacc = 0.0;
                        for (std::int64_t tt = tlo; tt <= thi; ++tt) {
                            gxr[tt] += wv * G[gbase + tt * stride];
                            wacc += xr[tt] * G[gbase + tt * stride];
                        }
                        GW[(ic * Cout + oc) * K + k] += wacc;
                    }
        }
    });
}

}  // namespace lsmu::ad
