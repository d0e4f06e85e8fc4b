#include "astf/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "astf/error.hpp"
#include "astf/numerics/autograd.hpp"

namespace astf {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

std::vector<std::size_t> strides_of(const Shape& s) {
    std::vector<std::size_t> st(s.size(), 1);
    for (std::size_t i = s.size(); i-- > 1;) st[i - 1] = st[i] * s[i];
    return st;
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
    std::size_t n = std::max(a.size(), b.size());
    Shape out(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t da = i < n - a.size() ? 1 : a[i - (n - a.size())];
        std::size_t db = i < n - b.size() ? 1 : b[i - (n - b.size())];
        if (da != db && da != 1 && db != 1) {
            throw DimensionError(std::string(op) + ": cannot broadcast " + shape_str(a) +
                                 " with " + shape_str(b));
        }
        out[i] = da == 1 ? db : da;
    }
    return out;
}

// Strides of `src` viewed as broadcast to `out` (zero along broadcast axes).
std::vector<std::size_t> broadcast_strides(const Shape& src, const Shape& out) {
    std::vector<std::size_t> st(out.size(), 0);
    auto own = strides_of(src);
    std::size_t lead = out.size() - src.size();
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i] != 1) st[lead + i] = own[i];
    }
    return st;
}

// Calls fn(out_index, a_offset, b_offset) for every element of `out`.
template <class Fn>
void for_each_broadcast(const Shape& out, const std::vector<std::size_t>& sa,
                        const std::vector<std::size_t>& sb, Fn&& fn) {
    std::size_t total = shape_numel(out);
    if (total == 0) return;
    if (out.empty()) {
        fn(0, 0, 0);
        return;
    }
    std::size_t nd = out.size();
    std::size_t inner = out[nd - 1];
    std::size_t ia_step = sa[nd - 1];
    std::size_t ib_step = sb[nd - 1];
    std::vector<std::size_t> idx(nd, 0);
    std::size_t ia = 0;
    std::size_t ib = 0;
    for (std::size_t o = 0; o < total; o += inner) {
        std::size_t xa = ia;
        std::size_t xb = ib;
        for (std::size_t k = 0; k < inner; ++k) {
            fn(o + k, xa, xb);
            xa += ia_step;
            xb += ib_step;
        }
        for (std::size_t d = nd - 1; d-- > 0;) {
            ++idx[d];
            ia += sa[d];
            ib += sb[d];
            if (idx[d] < out[d]) break;
            ia -= sa[d] * out[d];
            ib -= sb[d] * out[d];
            idx[d] = 0;
        }
    }
}

template <class F>
std::pair<Shape, std::vector<double>> broadcast_apply(const char* name, const Tensor& a,
                                                      const Tensor& b, F f) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    auto va = a.values();
    auto vb = b.values();
    if (sa == sb) {
        std::vector<double> out(va.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(va[i], vb[i]);
        return {sa, std::move(out)};
    }
    Shape so = broadcast_shape(sa, sb, name);
    std::vector<double> out(shape_numel(so));
    if (vb.size() == 1 && so == sa) {
        double s = vb[0];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(va[i], s);
        return {so, std::move(out)};
    }
    if (va.size() == 1 && so == sb) {
        double s = va[0];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(s, vb[i]);
        return {so, std::move(out)};
    }
    for_each_broadcast(so, broadcast_strides(sa, so), broadcast_strides(sb, so),
                       [&](std::size_t o, std::size_t ia, std::size_t ib) {
                           out[o] = f(va[ia], vb[ib]);
                       });
    return {so, std::move(out)};
}

template <class F>
std::vector<double> map_values(const Tensor& x, F f) {
    auto v = x.values();
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = f(v[i]);
    return out;
}

// Constant tensor used as a gradient mask; never part of a graph.
template <class F>
Tensor mask_of(const Tensor& x, F f) {
    return Tensor(x.shape(), map_values(x, f));
}

struct AxisSplit {
    std::size_t outer;
    std::size_t n;
    std::size_t inner;
};

AxisSplit split_axis(const Shape& s, std::size_t axis, const char* op) {
    if (axis >= s.size()) {
        throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                             " out of range for " + shape_str(s));
    }
    AxisSplit r{1, s[axis], 1};
    for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
    return r;
}

Shape reduced_shape(const Shape& s, std::size_t axis, bool keepdim) {
    Shape r = s;
    if (keepdim) {
        r[axis] = 1;
    } else {
        r.erase(r.begin() + static_cast<std::ptrdiff_t>(axis));
    }
    return r;
}

}  // namespace

// ---------------------------------------------------------------- elementwise

Tensor add(const Tensor& a, const Tensor& b) {
    auto [shape, data] = broadcast_apply("add", a, b, [](double x, double y) { return x + y; });
    return make_result("add", shape, std::move(data), {a, b},
                       [a, b](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {a.requires_grad() ? sum_to(g, a.shape()) : Tensor(),
                                   b.requires_grad() ? sum_to(g, b.shape()) : Tensor()};
                       });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    auto [shape, data] = broadcast_apply("sub", a, b, [](double x, double y) { return x - y; });
    return make_result("sub", shape, std::move(data), {a, b},
                       [a, b](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {a.requires_grad() ? sum_to(g, a.shape()) : Tensor(),
                                   b.requires_grad() ? sum_to(neg(g), b.shape()) : Tensor()};
                       });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    auto [shape, data] = broadcast_apply("mul", a, b, [](double x, double y) { return x * y; });
    return make_result("mul", shape, std::move(data), {a, b},
                       [a, b](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {a.requires_grad() ? sum_to(mul(g, b), a.shape()) : Tensor(),
                                   b.requires_grad() ? sum_to(mul(g, a), b.shape()) : Tensor()};
                       });
}

Tensor div(const Tensor& a, const Tensor& b) {
    auto [shape, data] = broadcast_apply("div", a, b, [](double x, double y) { return x / y; });
    return make_result("div", shape, std::move(data), {a, b},
                       [a, b](const Tensor& out, const Tensor& g) -> std::vector<Tensor> {
                           Tensor ga, gb;
                           if (a.requires_grad()) ga = sum_to(div(g, b), a.shape());
                           if (b.requires_grad()) gb = sum_to(neg(div(mul(g, out), b)), b.shape());
                           return {ga, gb};
                       });
}

Tensor add(const Tensor& a, double s) {
    return make_result("add_scalar", a.shape(), map_values(a, [s](double x) { return x + s; }),
                       {a}, [](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {g};
                       });
}

Tensor mul(const Tensor& a, double s) {
    return make_result("mul_scalar", a.shape(), map_values(a, [s](double x) { return x * s; }),
                       {a}, [s](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {mul(g, s)};
                       });
}

Tensor neg(const Tensor& a) {
    return make_result("neg", a.shape(), map_values(a, [](double x) { return -x; }), {a},
                       [](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {neg(g)};
                       });
}

Tensor exp(const Tensor& x) {
    return make_result("exp", x.shape(), map_values(x, [](double v) { return std::exp(v); }), {x},
                       [](const Tensor& out, const Tensor& g) -> std::vector<Tensor> {
                           return {mul(g, out)};
                       });
}

Tensor log(const Tensor& x) {
    return make_result("log", x.shape(), map_values(x, [](double v) { return std::log(v); }), {x},
                       [x](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {div(g, x)};
                       });
}

Tensor sqrt(const Tensor& x) {
    return make_result("sqrt", x.shape(), map_values(x, [](double v) { return std::sqrt(v); }),
                       {x}, [](const Tensor& out, const Tensor& g) -> std::vector<Tensor> {
                           return {div(mul(g, 0.5), out)};
                       });
}

Tensor pow(const Tensor& x, double p) {
    return make_result("pow", x.shape(), map_values(x, [p](double v) { return std::pow(v, p); }),
                       {x}, [x, p](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           if (p == 1.0) return {g};
                           return {mul(g, mul(pow(x, p - 1.0), p))};
                       });
}

Tensor square(const Tensor& x) {
    return make_result("square", x.shape(), map_values(x, [](double v) { return v * v; }), {x},
                       [x](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {mul(mul(g, x), 2.0)};
                       });
}

Tensor sigmoid(const Tensor& x) {
    auto f = [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        double e = std::exp(v);
        return e / (1.0 + e);
    };
    return make_result("sigmoid", x.shape(), map_values(x, f), {x},
                       [](const Tensor& out, const Tensor& g) -> std::vector<Tensor> {
                           return {mul(g, mul(out, add(neg(out), 1.0)))};
                       });
}

Tensor softplus(const Tensor& x) {
    auto f = [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); };
    return make_result("softplus", x.shape(), map_values(x, f), {x},
                       [x](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {mul(g, sigmoid(x))};
                       });
}

Tensor leaky_relu(const Tensor& x, double slope) {
    return make_result("leaky_relu", x.shape(),
                       map_values(x, [slope](double v) { return v > 0 ? v : slope * v; }), {x},
                       [x, slope](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {mul(g, mask_of(x, [slope](double v) {
                                           return v > 0 ? 1.0 : slope;
                                       }))};
                       });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
    return make_result("clamp", x.shape(),
                       map_values(x, [lo, hi](double v) { return std::clamp(v, lo, hi); }), {x},
                       [x, lo, hi](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {mul(g, mask_of(x, [lo, hi](double v) {
                                           return v > lo && v < hi ? 1.0 : 0.0;
                                       }))};
                       });
}

Tensor clamp_min(const Tensor& x, double lo) {
    return clamp(x, lo, std::numeric_limits<double>::infinity());
}

// ----------------------------------------------------------------- reductions

Tensor sum(const Tensor& x) {
    double total = 0.0;
    for (double v : x.values()) total += v;
    return make_result("sum", Shape{}, {total}, {x},
                       [x](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {broadcast_to(g, x.shape())};
                       });
}

Tensor sum(const Tensor& x, std::size_t axis, bool keepdim) {
    AxisSplit sp = split_axis(x.shape(), axis, "sum");
    auto v = x.values();
    std::vector<double> out(sp.outer * sp.inner, 0.0);
    for (std::size_t o = 0; o < sp.outer; ++o) {
        const double* src = v.data() + o * sp.n * sp.inner;
        double* dst = out.data() + o * sp.inner;
        for (std::size_t k = 0; k < sp.n; ++k) {
            for (std::size_t i = 0; i < sp.inner; ++i) dst[i] += src[k * sp.inner + i];
        }
    }
    Shape keep = reduced_shape(x.shape(), axis, true);
    return make_result("sum_axis", reduced_shape(x.shape(), axis, keepdim), std::move(out), {x},
                       [x, keep](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {broadcast_to(reshape(g, keep), x.shape())};
                       });
}

Tensor mean(const Tensor& x) { return mul(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor mean(const Tensor& x, std::size_t axis, bool keepdim) {
    return mul(sum(x, axis, keepdim), 1.0 / static_cast<double>(x.dim(axis)));
}

Tensor softmax(const Tensor& x, std::size_t axis) {
    AxisSplit sp = split_axis(x.shape(), axis, "softmax");
    auto v = x.values();
    std::vector<double> out(v.size());
    for (std::size_t o = 0; o < sp.outer; ++o) {
        for (std::size_t i = 0; i < sp.inner; ++i) {
            std::size_t base = o * sp.n * sp.inner + i;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < sp.n; ++k) mx = std::max(mx, v[base + k * sp.inner]);
            double total = 0.0;
            for (std::size_t k = 0; k < sp.n; ++k) {
                double e = std::exp(v[base + k * sp.inner] - mx);
                out[base + k * sp.inner] = e;
                total += e;
            }
            for (std::size_t k = 0; k < sp.n; ++k) out[base + k * sp.inner] /= total;
        }
    }
    return make_result("softmax", x.shape(), std::move(out), {x},
                       [axis](const Tensor& y, const Tensor& g) -> std::vector<Tensor> {
                           Tensor dot = sum(mul(g, y), axis, true);
                           return {mul(y, sub(g, dot))};
                       });
}

Tensor log_softmax(const Tensor& x, std::size_t axis) {
    AxisSplit sp = split_axis(x.shape(), axis, "log_softmax");
    auto v = x.values();
    std::vector<double> out(v.size());
    for (std::size_t o = 0; o < sp.outer; ++o) {
        for (std::size_t i = 0; i < sp.inner; ++i) {
            std::size_t base = o * sp.n * sp.inner + i;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < sp.n; ++k) mx = std::max(mx, v[base + k * sp.inner]);
            double total = 0.0;
            for (std::size_t k = 0; k < sp.n; ++k) total += std::exp(v[base + k * sp.inner] - mx);
            double lse = mx + std::log(total);
            for (std::size_t k = 0; k < sp.n; ++k) {
                out[base + k * sp.inner] = v[base + k * sp.inner] - lse;
            }
        }
    }
    return make_result("log_softmax", x.shape(), std::move(out), {x},
                       [axis](const Tensor& y, const Tensor& g) -> std::vector<Tensor> {
                           return {sub(g, mul(exp(y), sum(g, axis, true)))};
                       });
}

// ------------------------------------------------------------------- algebra

Tensor matmul(const Tensor& a, const Tensor& b, bool ta, bool tb) {
    if (a.ndim() != 2 || b.ndim() != 2) {
        throw DimensionError("matmul needs 2-D operands, got " + shape_str(a.shape()) + " and " +
                             shape_str(b.shape()));
    }
    std::size_t m = ta ? a.dim(1) : a.dim(0);
    std::size_t ka = ta ? a.dim(0) : a.dim(1);
    std::size_t kb = tb ? b.dim(1) : b.dim(0);
    std::size_t n = tb ? b.dim(0) : b.dim(1);
    if (ka != kb) {
        throw DimensionError("matmul inner dimensions differ: " + shape_str(a.shape()) +
                             (ta ? "^T" : "") + " x " + shape_str(b.shape()) + (tb ? "^T" : ""));
    }
    std::vector<double> out(m * n, 0.0);
    if (m && n && ka) {
        ConstMap A(a.values().data(), static_cast<Eigen::Index>(a.dim(0)),
                   static_cast<Eigen::Index>(a.dim(1)));
        ConstMap B(b.values().data(), static_cast<Eigen::Index>(b.dim(0)),
                   static_cast<Eigen::Index>(b.dim(1)));
        MutMap C(out.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
        if (!ta && !tb) C.noalias() = A * B;
        else if (!ta && tb) C.noalias() = A * B.transpose();
        else if (ta && !tb) C.noalias() = A.transpose() * B;
        else C.noalias() = A.transpose() * B.transpose();
    }
    return make_result(
        "matmul", Shape{m, n}, std::move(out), {a, b},
        [a, b, ta, tb](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
            Tensor ga, gb;
            if (!ta && !tb) {
                if (a.requires_grad()) ga = matmul(g, b, false, true);
                if (b.requires_grad()) gb = matmul(a, g, true, false);
            } else if (!ta && tb) {
                if (a.requires_grad()) ga = matmul(g, b, false, false);
                if (b.requires_grad()) gb = matmul(g, a, true, false);
            } else if (ta && !tb) {
                if (a.requires_grad()) ga = matmul(b, g, false, true);
                if (b.requires_grad()) gb = matmul(a, g, false, false);
            } else {
                if (a.requires_grad()) ga = matmul(b, g, true, true);
                if (b.requires_grad()) gb = matmul(g, a, true, true);
            }
            return {ga, gb};
        });
}

Tensor transpose(const Tensor& x) {
    if (x.ndim() != 2) throw DimensionError("transpose needs a 2-D tensor, got " + shape_str(x.shape()));
    std::size_t r = x.dim(0);
    std::size_t c = x.dim(1);
    auto v = x.values();
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = v[i * c + j];
    }
    return make_result("transpose", Shape{c, r}, std::move(out), {x},
                       [](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {transpose(g)};
                       });
}

// ------------------------------------------------------------------- layout

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) {
        throw DimensionError("cannot reshape " + shape_str(x.shape()) + " to " + shape_str(shape));
    }
    if (shape == x.shape()) return x;
    auto v = x.values();
    Shape original = x.shape();
    return make_result("reshape", std::move(shape), std::vector<double>(v.begin(), v.end()), {x},
                       [original](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {reshape(g, original)};
                       });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
    AxisSplit sp = split_axis(x.shape(), axis, "slice");
    if (begin > end || end > sp.n) {
        throw DimensionError("slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                             ") out of range for axis " + std::to_string(axis) + " of " +
                             shape_str(x.shape()));
    }
    if (begin == 0 && end == sp.n) return x;
    std::size_t len = end - begin;
    auto v = x.values();
    std::vector<double> out(sp.outer * len * sp.inner);
    for (std::size_t o = 0; o < sp.outer; ++o) {
        const double* src = v.data() + (o * sp.n + begin) * sp.inner;
        std::copy(src, src + len * sp.inner, out.data() + o * len * sp.inner);
    }
    Shape s = x.shape();
    s[axis] = len;
    std::size_t full = sp.n;
    return make_result("slice", std::move(s), std::move(out), {x},
                       [axis, begin, full](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {embed(g, axis, begin, full)};
                       });
}

Tensor embed(const Tensor& x, std::size_t axis, std::size_t offset, std::size_t full) {
    AxisSplit sp = split_axis(x.shape(), axis, "embed");
    if (offset + sp.n > full) throw DimensionError("embed: slab exceeds target extent");
    if (offset == 0 && sp.n == full) return x;
    auto v = x.values();
    std::vector<double> out(sp.outer * full * sp.inner, 0.0);
    for (std::size_t o = 0; o < sp.outer; ++o) {
        const double* src = v.data() + o * sp.n * sp.inner;
        std::copy(src, src + sp.n * sp.inner, out.data() + (o * full + offset) * sp.inner);
    }
    Shape s = x.shape();
    s[axis] = full;
    std::size_t len = sp.n;
    return make_result("embed", std::move(s), std::move(out), {x},
                       [axis, offset, len](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {slice(g, axis, offset, offset + len)};
                       });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) throw ContractError("concat of zero tensors");
    if (parts.size() == 1) return parts.front();
    Shape s = parts.front().shape();
    if (axis >= s.size()) throw DimensionError("concat axis out of range for " + shape_str(s));
    std::vector<std::size_t> extents;
    std::size_t total = 0;
    for (const Tensor& p : parts) {
        const Shape& ps = p.shape();
        bool ok = ps.size() == s.size();
        for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == axis || ps[i] == s[i];
        if (!ok) {
            throw DimensionError("concat along axis " + std::to_string(axis) + ": " +
                                 shape_str(s) + " vs " + shape_str(ps));
        }
        extents.push_back(ps[axis]);
        total += ps[axis];
    }
    AxisSplit sp = split_axis(s, axis, "concat");
    std::vector<double> out(sp.outer * total * sp.inner);
    std::size_t offset = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        auto v = parts[p].values();
        std::size_t block = extents[p] * sp.inner;
        for (std::size_t o = 0; o < sp.outer; ++o) {
            std::copy(v.data() + o * block, v.data() + (o + 1) * block,
                      out.data() + (o * total + offset) * sp.inner);
        }
        offset += extents[p];
    }
    s[axis] = total;
    return make_result("concat", std::move(s), std::move(out), parts,
                       [parts, axis, extents](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           std::vector<Tensor> grads;
                           std::size_t at = 0;
                           for (std::size_t p = 0; p < parts.size(); ++p) {
                               grads.push_back(parts[p].requires_grad()
                                                   ? slice(g, axis, at, at + extents[p])
                                                   : Tensor());
                               at += extents[p];
                           }
                           return grads;
                       });
}

Tensor broadcast_to(const Tensor& x, const Shape& shape) {
    if (x.shape() == shape) return x;
    Shape check = broadcast_shape(x.shape(), shape, "broadcast_to");
    if (check != shape) {
        throw DimensionError("cannot broadcast " + shape_str(x.shape()) + " to " + shape_str(shape));
    }
    auto v = x.values();
    std::vector<double> out(shape_numel(shape));
    std::vector<std::size_t> zero(shape.size(), 0);
    for_each_broadcast(shape, broadcast_strides(x.shape(), shape), zero,
                       [&](std::size_t o, std::size_t ia, std::size_t) { out[o] = v[ia]; });
    Shape original = x.shape();
    return make_result("broadcast_to", shape, std::move(out), {x},
                       [original](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {sum_to(g, original)};
                       });
}

Tensor sum_to(const Tensor& x, const Shape& shape) {
    if (x.shape() == shape) return x;
    Shape check = broadcast_shape(shape, x.shape(), "sum_to");
    if (check != x.shape()) {
        throw DimensionError("cannot sum " + shape_str(x.shape()) + " down to " + shape_str(shape));
    }
    auto v = x.values();
    std::vector<double> out(shape_numel(shape), 0.0);
    std::vector<std::size_t> zero(x.ndim(), 0);
    for_each_broadcast(x.shape(), broadcast_strides(shape, x.shape()), zero,
                       [&](std::size_t o, std::size_t it, std::size_t) { out[it] += v[o]; });
    Shape original = x.shape();
    return make_result("sum_to", shape, std::move(out), {x},
                       [original](const Tensor&, const Tensor& g) -> std::vector<Tensor> {
                           return {broadcast_to(g, original)};
                       });
}

Tensor stop_gradient(const Tensor& x) { return x.detach(); }

}  // namespace astf
