#include "cghc/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "cghc/errors.hpp"

namespace cghc {

namespace {

// NHWC activation tensor.
struct Tensor {
    int h = 0, w = 0, c = 0;
    std::vector<double> v;

    void reset(int hh, int ww, int cc) {
        h = hh;
        w = ww;
        c = cc;
        v.assign(static_cast<size_t>(hh) * ww * cc, 0.0);
    }
    double* px(int y, int x) { return v.data() + (static_cast<size_t>(y) * w + x) * c; }
    const double* px(int y, int x) const {
        return v.data() + (static_cast<size_t>(y) * w + x) * c;
    }
};

// Portable Box-Muller so initialization does not depend on the standard
// library's normal_distribution implementation.
class GaussianSampler {
public:
    explicit GaussianSampler(uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = kTwoPi * u2;
        spare_ = r * std::sin(a);
        have_ = true;
        return r * std::cos(a);
    }

private:
    double uniform01() { return (rng_() >> 11) * 0x1.0p-53; }
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_ = false;
};

// Gather-form multiply-accumulate shared by the forward pass and the
// din backward pass:
//   dst(y, x, 0:CO) (+)= sum_{ky,kx,c} src(y+ky-ph, x+kx-pw, c) * w[ky][kx][c][0:CO]
// Weights are tap blocks with the destination channel minor; every inner loop
// is an element-wise fused multiply-add over contiguous memory, so it
// vectorizes without reassociating reductions and summation order is fixed.

struct GatherArgs {
    const double* src;
    int src_c;
    double* dst;
    int dst_c;
    int w, h;
    int kh, kw;
    const double* weights; // [ky][kx][src_c][dst_c]
    const double* bias;    // nullptr: accumulate from zero
    bool relu;
};

// Register-tiled interior kernel: CO accumulators held in registers across the
// whole tap loop, XT output pixels per weight fetch.
template <int CO, int XT>
void gather_tile(const GatherArgs& a, int y, int x0, int ky0, int ky1) {
    const int ph = a.kh / 2, pw = a.kw / 2;
    double acc[XT][CO];
    for (int t = 0; t < XT; ++t)
        for (int o = 0; o < CO; ++o) acc[t][o] = a.bias ? a.bias[o] : 0.0;

    for (int ky = ky0; ky < ky1; ++ky) {
        const int iy = y + ky - ph;
        const double* __restrict srow =
            a.src + (static_cast<size_t>(iy) * a.w + (x0 - pw)) * a.src_c;
        const double* __restrict wrow =
            a.weights + static_cast<size_t>(ky) * a.kw * a.src_c * CO;
        for (int kx = 0; kx < a.kw; ++kx) {
            const double* __restrict ip = srow + static_cast<size_t>(kx) * a.src_c;
            const double* __restrict wtap = wrow + static_cast<size_t>(kx) * a.src_c * CO;
            for (int c = 0; c < a.src_c; ++c) {
                const double* __restrict wp = wtap + static_cast<size_t>(c) * CO;
                for (int t = 0; t < XT; ++t) {
                    const double v = ip[static_cast<size_t>(t) * a.src_c + c];
                    for (int o = 0; o < CO; ++o) acc[t][o] += v * wp[o];
                }
            }
        }
    }
    for (int t = 0; t < XT; ++t) {
        double* __restrict op = a.dst + (static_cast<size_t>(y) * a.w + x0 + t) * CO;
        if (a.relu)
            for (int o = 0; o < CO; ++o) op[o] = acc[t][o] > 0.0 ? acc[t][o] : 0.0;
        else
            for (int o = 0; o < CO; ++o) op[o] = acc[t][o];
    }
}

// Generic per-pixel path for borders and channel counts without a tile kernel.
void gather_pixel(const GatherArgs& a, int y, int x, int ky0, int ky1) {
    const int ph = a.kh / 2, pw = a.kw / 2;
    const int co = a.dst_c;
    double* __restrict op = a.dst + (static_cast<size_t>(y) * a.w + x) * co;
    if (a.bias)
        for (int o = 0; o < co; ++o) op[o] = a.bias[o];
    const int kx0 = std::max(0, pw - x);
    const int kx1 = std::min(a.kw, a.w + pw - x);
    for (int ky = ky0; ky < ky1; ++ky) {
        const int iy = y + ky - ph;
        for (int kx = kx0; kx < kx1; ++kx) {
            const int ix = x + kx - pw;
            const double* __restrict ip =
                a.src + (static_cast<size_t>(iy) * a.w + ix) * a.src_c;
            const double* __restrict wtap =
                a.weights + (static_cast<size_t>(ky) * a.kw + kx) * a.src_c * co;
            for (int c = 0; c < a.src_c; ++c) {
                const double v = ip[c];
                if (v == 0.0) continue;
                const double* __restrict wp = wtap + static_cast<size_t>(c) * co;
                for (int o = 0; o < co; ++o) op[o] += v * wp[o];
            }
        }
    }
    if (a.relu)
        for (int o = 0; o < co; ++o) op[o] = op[o] > 0.0 ? op[o] : 0.0;
}

void gather_run(const GatherArgs& a) {
    const int ph = a.kh / 2, pw = a.kw / 2;
    for (int y = 0; y < a.h; ++y) {
        const int ky0 = std::max(0, ph - y);
        const int ky1 = std::min(a.kh, a.h + ph - y);
        const int x_lo = pw;
        const int x_hi = a.w - pw; // [x_lo, x_hi): all horizontal taps valid
        int x = 0;
        for (; x < std::min(x_lo, a.w); ++x) gather_pixel(a, y, x, ky0, ky1);
        if (a.dst_c == 64) {
            for (; x + 2 <= x_hi; x += 2) gather_tile<64, 2>(a, y, x, ky0, ky1);
        } else if (a.dst_c == 32) {
            for (; x + 4 <= x_hi; x += 4) gather_tile<32, 4>(a, y, x, ky0, ky1);
        } else if (a.dst_c == 16) {
            for (; x + 4 <= x_hi; x += 4) gather_tile<16, 4>(a, y, x, ky0, ky1);
        }
        for (; x < a.w; ++x) gather_pixel(a, y, x, ky0, ky1);
    }
}

void conv_forward(const ConvLayer& L, const Tensor& in, Tensor& out) {
    out.reset(in.h, in.w, L.cout);
    GatherArgs a;
    a.src = in.v.data();
    a.src_c = L.cin;
    a.dst = out.v.data();
    a.dst_c = L.cout;
    a.w = in.w;
    a.h = in.h;
    a.kh = L.kh;
    a.kw = L.kw;
    a.weights = L.weights.data();
    a.bias = L.biases.data();
    a.relu = (L.act == Activation::rectifier);
    gather_run(a);
}

// One tap of the weight-gradient accumulation, four input channels register-
// blocked across the pixel stream.
template <int CO>
void weight_grad_tap(const Tensor& in, const Tensor& dout, double* __restrict gwp,
                     int y0, int y1, int x0, int x1, int dy, int dx) {
    const int cin = in.c;
    int ci = 0;
    for (; ci + 4 <= cin; ci += 4) {
        double acc[4][CO] = {};
        for (int y = y0; y < y1; ++y) {
            const double* __restrict iprow = in.px(y + dy, x0 + dx) + ci;
            const double* __restrict dprow = dout.px(y, x0);
            const int run = x1 - x0;
            for (int x = 0; x < run; ++x) {
                const double* __restrict ip = iprow + static_cast<size_t>(x) * cin;
                const double* __restrict dp = dprow + static_cast<size_t>(x) * CO;
                for (int t = 0; t < 4; ++t) {
                    const double v = ip[t];
                    for (int o = 0; o < CO; ++o) acc[t][o] += v * dp[o];
                }
            }
        }
        for (int t = 0; t < 4; ++t) {
            double* __restrict g = gwp + (static_cast<size_t>(ci) + t) * CO;
            for (int o = 0; o < CO; ++o) g[o] += acc[t][o];
        }
    }
    for (; ci < cin; ++ci) { // channel remainder
        double acc[CO] = {};
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                const double v = in.px(y + dy, x + dx)[ci];
                const double* __restrict dp = dout.px(y, x);
                for (int o = 0; o < CO; ++o) acc[o] += v * dp[o];
            }
        }
        double* __restrict g = gwp + static_cast<size_t>(ci) * CO;
        for (int o = 0; o < CO; ++o) g[o] += acc[o];
    }
}

// Weight tensor rearranged for the din gather: spatially flipped taps with the
// input channel minor, wft[ky][kx][o][ci] = W[kh-1-ky][kw-1-kx][ci][o].
std::vector<double> flip_transpose_weights(const ConvLayer& L) {
    std::vector<double> wft(L.weights.size());
    for (int ky = 0; ky < L.kh; ++ky)
        for (int kx = 0; kx < L.kw; ++kx) {
            const size_t dst_tap = (static_cast<size_t>(ky) * L.kw + kx) *
                                   static_cast<size_t>(L.cin) * L.cout;
            const size_t src_tap =
                (static_cast<size_t>(L.kh - 1 - ky) * L.kw + (L.kw - 1 - kx)) *
                static_cast<size_t>(L.cin) * L.cout;
            for (int ci = 0; ci < L.cin; ++ci)
                for (int o = 0; o < L.cout; ++o)
                    wft[dst_tap + static_cast<size_t>(o) * L.cin + ci] =
                        L.weights[src_tap + static_cast<size_t>(ci) * L.cout + o];
        }
    return wft;
}

// Backward pass for one layer. `dout` holds d(loss)/d(post-activation) and is
// turned into d/d(pre-activation) in place using the stored outputs. Fills
// din (same shape as `in`) and accumulates into gw / gb. `wft` comes from
// flip_transpose_weights.
void conv_backward(const ConvLayer& L, const std::vector<double>& wft, const Tensor& in,
                   const Tensor& outact, Tensor& dout, Tensor& din, double* gw,
                   double* gb, bool need_din) {
    const int ph = L.kh / 2, pw = L.kw / 2;
    const int W = in.w, H = in.h, cin = L.cin, cout = L.cout;

    if (L.act == Activation::rectifier) {
        for (size_t i = 0; i < dout.v.size(); ++i)
            if (outact.v[i] <= 0.0) dout.v[i] = 0.0;
    }

    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double* __restrict dp = dout.px(y, x);
            for (int o = 0; o < cout; ++o) gb[o] += dp[o];
        }

    // din(y,x,ci) = sum_{ky,kx,o} dout(y+ky-ph, x+kx-pw, o) * wft[ky][kx][o][ci]
    if (need_din) {
        din.reset(H, W, cin);
        GatherArgs a;
        a.src = dout.v.data();
        a.src_c = cout;
        a.dst = din.v.data();
        a.dst_c = cin;
        a.w = W;
        a.h = H;
        a.kh = L.kh;
        a.kw = L.kw;
        a.weights = wft.data();
        a.bias = nullptr;
        a.relu = false;
        gather_run(a);
    }

    // dW[ky][kx][ci][o] += sum_{y,x} in(y+ky-ph, x+kx-pw, ci) * dout(y,x,o);
    // tap-outer order keeps each cin*cout gradient block cache-resident
    for (int ky = 0; ky < L.kh; ++ky) {
        const int y0 = std::max(0, ph - ky);
        const int y1 = std::min(H, H + ph - ky);
        for (int kx = 0; kx < L.kw; ++kx) {
            const int x0 = std::max(0, pw - kx);
            const int x1 = std::min(W, W + pw - kx);
            double* __restrict gwp =
                gw + (static_cast<size_t>(ky) * L.kw + kx) * cin * cout;
            const int dy = ky - ph, dx = kx - pw;
            switch (cout) {
                case 64: weight_grad_tap<64>(in, dout, gwp, y0, y1, x0, x1, dy, dx); break;
                case 32: weight_grad_tap<32>(in, dout, gwp, y0, y1, x0, x1, dy, dx); break;
                case 16: weight_grad_tap<16>(in, dout, gwp, y0, y1, x0, x1, dy, dx); break;
                default:
                    for (int y = y0; y < y1; ++y) {
                        for (int x = x0; x < x1; ++x) {
                            const double* __restrict ip = in.px(y + dy, x + dx);
                            const double* __restrict dp = dout.px(y, x);
                            for (int ci = 0; ci < cin; ++ci) {
                                const double v = ip[ci];
                                if (v == 0.0) continue;
                                double* __restrict g = gwp + static_cast<size_t>(ci) * cout;
                                for (int o = 0; o < cout; ++o) g[o] += v * dp[o];
                            }
                        }
                    }
            }
        }
    }
}

void image_to_tensor(const std::vector<double>& img, int w, int h, Tensor& t) {
    t.reset(h, w, 1);
    std::copy(img.begin(), img.end(), t.v.begin());
}

} // namespace

void check_model(const CnnModel& m) {
    if (m.layers.empty()) throw std::invalid_argument("CnnModel: no layers");
    int chain = 1;
    for (size_t i = 0; i < m.layers.size(); ++i) {
        const auto& L = m.layers[i];
        if (L.kh < 1 || L.kw < 1 || L.kh % 2 == 0 || L.kw % 2 == 0)
            throw std::invalid_argument("ConvLayer: kernel dims must be odd and >= 1");
        if (L.cin < 1 || L.cout < 1)
            throw std::invalid_argument("ConvLayer: channel counts must be >= 1");
        if (L.cin != chain)
            throw std::invalid_argument("CnnModel: channel chaining inconsistent");
        chain = L.cout;
        if (L.weights.size() != L.weight_count() ||
            L.biases.size() != static_cast<size_t>(L.cout))
            throw std::invalid_argument("ConvLayer: parameter array sizes inconsistent");
        for (double v : L.weights)
            if (!std::isfinite(v)) throw std::invalid_argument("ConvLayer: non-finite weight");
        for (double v : L.biases)
            if (!std::isfinite(v)) throw std::invalid_argument("ConvLayer: non-finite bias");
    }
    if (m.layers.front().cin != 1 || m.layers.back().cout != 1)
        throw std::invalid_argument("CnnModel: first input and last output must be single-channel");
}

CnnModel make_arcnn(double distance_tag, uint64_t seed, int c1, int c2, int c3,
                    double init_std, double init_std_last, bool identity_path) {
    const int ks[4] = {9, 7, 1, 5};
    const int cins[5] = {1, c1, c2, c3, 1};
    GaussianSampler gauss(seed);

    CnnModel m;
    m.distance_tag = distance_tag;
    for (int i = 0; i < 4; ++i) {
        ConvLayer L;
        L.kh = L.kw = ks[i];
        L.cin = cins[i];
        L.cout = cins[i + 1];
        L.act = (i < 3) ? Activation::rectifier : Activation::identity;
        const double sd = (i == 3) ? init_std_last : init_std;
        L.weights.resize(L.weight_count());
        for (auto& w : L.weights) w = sd * gauss();
        if (identity_path)
            L.weights[L.weight_index(L.kh / 2, L.kw / 2, 0, 0)] += 1.0;
        L.biases.assign(static_cast<size_t>(L.cout), 0.0);
        m.layers.push_back(std::move(L));
    }
    check_model(m);
    return m;
}

ImageF forward(const CnnModel& m, const ImageF& input) {
    check_model(m);
    if (input.width < 1 || input.height < 1 ||
        input.data.size() != static_cast<size_t>(input.width) * input.height)
        throw std::invalid_argument("forward: bad input image");

    Tensor cur, next;
    image_to_tensor(input.data, input.width, input.height, cur);
    for (const auto& L : m.layers) {
        conv_forward(L, cur, next);
        std::swap(cur, next);
    }
    ImageF out;
    out.width = input.width;
    out.height = input.height;
    out.data.assign(cur.v.begin(), cur.v.end());
    return out;
}

std::vector<PatchPair> extract_patches(const Gray8Image& compressed,
                                       const Gray8Image& clean, int stride,
                                       bool augment) {
    check_image(compressed);
    check_image(clean);
    if (compressed.width != clean.width || compressed.height != clean.height)
        throw std::invalid_argument("extract_patches: dimension mismatch");
    if (compressed.width < kPatchSize || compressed.height < kPatchSize)
        throw std::invalid_argument("extract_patches: images smaller than a patch");
    if (stride < 1) throw std::invalid_argument("extract_patches: stride must be >= 1");

    const int n = kPatchSize;
    auto cut = [n](const Gray8Image& img, int y0, int x0) {
        std::vector<double> p(static_cast<size_t>(n) * n);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                p[static_cast<size_t>(y) * n + x] = img.at(y0 + y, x0 + x) / 255.0;
        return p;
    };
    // dihedral transform t = mirror*4 + rot applied to an n x n patch
    auto transform = [n](const std::vector<double>& p, int t) {
        std::vector<double> q(p.size());
        const int rot = t & 3;
        const bool mir = t & 4;
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                int sx = mir ? n - 1 - x : x;
                int sy = y;
                for (int r = 0; r < rot; ++r) { // rotate 90 degrees CW per step
                    const int ty = n - 1 - sx;
                    sx = sy;
                    sy = ty;
                }
                q[static_cast<size_t>(y) * n + x] = p[static_cast<size_t>(sy) * n + sx];
            }
        return q;
    };

    std::vector<PatchPair> out;
    for (int y0 = 0; y0 + n <= compressed.height; y0 += stride) {
        for (int x0 = 0; x0 + n <= compressed.width; x0 += stride) {
            PatchPair base{cut(compressed, y0, x0), cut(clean, y0, x0)};
            if (!augment) {
                out.push_back(std::move(base));
                continue;
            }
            for (int t = 0; t < 8; ++t)
                out.push_back({transform(base.input, t), transform(base.target, t)});
        }
    }
    return out;
}

namespace {

// Scratch buffers reused across samples of one batch.
struct BackpropWorkspace {
    std::vector<Tensor> acts; // acts[0] = input, acts[i] = output of layer i-1
    Tensor dcur, dprev;
};

int patch_side(const PatchPair& pair) {
    const int side = static_cast<int>(std::lround(std::sqrt(double(pair.input.size()))));
    if (side < 1 || static_cast<size_t>(side) * side != pair.input.size() ||
        pair.target.size() != pair.input.size())
        throw std::invalid_argument("PatchPair: members must be equal-sized squares");
    return side;
}

double sample_backprop(const CnnModel& m, const std::vector<std::vector<double>>& wts,
                       const PatchPair& pair, double scale, BackpropWorkspace& ws,
                       ModelGrad& grad) {
    const int nl = static_cast<int>(m.layers.size());
    const int side = patch_side(pair);
    ws.acts.resize(static_cast<size_t>(nl) + 1);
    image_to_tensor(pair.input, side, side, ws.acts[0]);
    for (int i = 0; i < nl; ++i) conv_forward(m.layers[i], ws.acts[i], ws.acts[i + 1]);

    const Tensor& out = ws.acts[nl];
    const size_t npix = out.v.size();
    double loss = 0.0;
    ws.dcur.reset(out.h, out.w, out.c);
    for (size_t i = 0; i < npix; ++i) {
        const double e = out.v[i] - pair.target[i];
        loss += e * e;
        ws.dcur.v[i] = 2.0 * e * scale / static_cast<double>(npix);
    }
    loss /= static_cast<double>(npix);

    for (int i = nl - 1; i >= 0; --i) {
        conv_backward(m.layers[i], wts[i], ws.acts[i], ws.acts[i + 1], ws.dcur,
                      ws.dprev, grad[i].weights.data(), grad[i].biases.data(),
                      /*need_din=*/i > 0);
        std::swap(ws.dcur, ws.dprev);
    }
    return loss;
}

ModelGrad zero_grad(const CnnModel& m) {
    ModelGrad g(m.layers.size());
    for (size_t i = 0; i < m.layers.size(); ++i) {
        g[i].weights.assign(m.layers[i].weights.size(), 0.0);
        g[i].biases.assign(m.layers[i].biases.size(), 0.0);
    }
    return g;
}

} // namespace

double loss_and_gradients(const CnnModel& m, const std::vector<PatchPair>& batch,
                          ModelGrad& grad) {
    check_model(m);
    if (batch.empty()) throw std::invalid_argument("loss_and_gradients: empty batch");
    grad = zero_grad(m);
    std::vector<std::vector<double>> wts;
    wts.reserve(m.layers.size());
    for (const auto& L : m.layers) wts.push_back(flip_transpose_weights(L));
    BackpropWorkspace ws;
    const double scale = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (const auto& pair : batch)
        loss += sample_backprop(m, wts, pair, scale, ws, grad);
    return loss * scale;
}

double batch_loss(const CnnModel& m, const std::vector<PatchPair>& batch) {
    if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
    Tensor cur, next;
    double loss = 0.0;
    for (const auto& pair : batch) {
        const int side = patch_side(pair);
        image_to_tensor(pair.input, side, side, cur);
        for (const auto& L : m.layers) {
            conv_forward(L, cur, next);
            std::swap(cur, next);
        }
        double acc = 0.0;
        for (size_t i = 0; i < cur.v.size(); ++i) {
            const double e = cur.v[i] - pair.target[i];
            acc += e * e;
        }
        loss += acc / static_cast<double>(cur.v.size());
    }
    return loss / static_cast<double>(batch.size());
}

void check_train_config(const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0.0))
        throw std::invalid_argument("TrainConfig: learning rate must be positive");
    if (cfg.batch_size < 1) throw std::invalid_argument("TrainConfig: batch size must be >= 1");
    if (cfg.iterations < 1) throw std::invalid_argument("TrainConfig: iterations must be >= 1");
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
        throw std::invalid_argument("TrainConfig: momentum must be in [0,1)");
    if (cfg.val_size < 0 || cfg.val_interval < 1 || cfg.plateau_patience < 1)
        throw std::invalid_argument("TrainConfig: bad validation settings");
}

TrainResult train(const CnnModel& initial, const std::vector<PatchPair>& pairs,
                  const TrainConfig& cfg) {
    check_model(initial);
    check_train_config(cfg);
    if (pairs.empty()) throw std::invalid_argument("train: no patch pairs");
    for (const auto& p : pairs)
        if (p.input.size() != static_cast<size_t>(kPatchSize) * kPatchSize ||
            p.target.size() != p.input.size())
            throw std::invalid_argument("train: patch pair is not 31x31");

    std::mt19937_64 rng(cfg.seed);
    std::vector<size_t> order(pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto shuffle = [&rng](std::vector<size_t>& v) {
        for (size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng() % i]);
    };
    shuffle(order);

    // optional validation holdout
    std::vector<PatchPair> val;
    size_t train_count = order.size();
    if (cfg.val_size > 0 && static_cast<size_t>(cfg.val_size) < order.size() / 2) {
        for (int i = 0; i < cfg.val_size; ++i)
            val.push_back(pairs[order[train_count - 1 - i]]);
        train_count -= static_cast<size_t>(cfg.val_size);
    }
    order.resize(train_count);

    TrainResult res;
    res.model = initial;
    auto& model = res.model;
    const int nl = static_cast<int>(model.layers.size());

    ModelGrad vel = zero_grad(model);
    ModelGrad grad;
    std::vector<PatchPair> batch;
    batch.reserve(static_cast<size_t>(cfg.batch_size));

    double lr = cfg.learning_rate;
    double best_val = std::numeric_limits<double>::infinity();
    int stale = 0;
    size_t cursor = 0;

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        batch.clear();
        for (int b = 0; b < cfg.batch_size; ++b) {
            if (cursor == order.size()) {
                shuffle(order);
                cursor = 0;
            }
            batch.push_back(pairs[order[cursor++]]);
        }

        const double loss = loss_and_gradients(model, batch, grad);
        if (!std::isfinite(loss))
            throw std::runtime_error("train: loss diverged (non-finite) at iteration " +
                                     std::to_string(iter));
        res.loss_trace.push_back(loss);

        for (int i = 0; i < nl; ++i) {
            const double lr_i = (i == nl - 1) ? lr * cfg.last_layer_lr_scale : lr;
            auto& L = model.layers[i];
            for (size_t j = 0; j < L.weights.size(); ++j) {
                vel[i].weights[j] = cfg.momentum * vel[i].weights[j] - lr_i * grad[i].weights[j];
                L.weights[j] += vel[i].weights[j];
            }
            for (size_t j = 0; j < L.biases.size(); ++j) {
                vel[i].biases[j] = cfg.momentum * vel[i].biases[j] - lr_i * grad[i].biases[j];
                L.biases[j] += vel[i].biases[j];
            }
        }

        if (!val.empty() && (iter + 1) % cfg.val_interval == 0) {
            const double vloss = batch_loss(model, val);
            res.val_trace.emplace_back(iter + 1, vloss);
            if (vloss < best_val * (1.0 - 1e-3)) {
                best_val = vloss;
                stale = 0;
            } else if (++stale >= cfg.plateau_patience) {
                if (lr * 0.5 >= cfg.learning_rate * cfg.min_lr_scale) lr *= 0.5;
                stale = 0;
            }
        }
    }
    return res;
}

Gray8Image restore(const CnnModel& m, const Gray8Image& hologram) {
    check_model(m);
    check_image(hologram);

    const int n = kPatchSize;
    const int tw = (hologram.width + n - 1) / n;
    const int th = (hologram.height + n - 1) / n;
    const int pw = tw * n, ph = th * n;

    // edge-replicated padded copy, scaled to [0,1]
    std::vector<double> padded(static_cast<size_t>(pw) * ph);
    for (int y = 0; y < ph; ++y) {
        const int sy = std::min(y, hologram.height - 1);
        for (int x = 0; x < pw; ++x) {
            const int sx = std::min(x, hologram.width - 1);
            padded[static_cast<size_t>(y) * pw + x] = hologram.at(sy, sx) / 255.0;
        }
    }

    std::vector<double> stitched(padded.size());
    ImageF tile;
    tile.width = tile.height = n;
    tile.data.resize(static_cast<size_t>(n) * n);
    for (int ty = 0; ty < th; ++ty)
        for (int tx = 0; tx < tw; ++tx) {
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x)
                    tile.data[static_cast<size_t>(y) * n + x] =
                        padded[static_cast<size_t>(ty * n + y) * pw + tx * n + x];
            const ImageF out = forward(m, tile);
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x)
                    stitched[static_cast<size_t>(ty * n + y) * pw + tx * n + x] =
                        out.data[static_cast<size_t>(y) * n + x];
        }

    Gray8Image out(hologram.width, hologram.height);
    for (int y = 0; y < hologram.height; ++y)
        for (int x = 0; x < hologram.width; ++x) {
            const double v = stitched[static_cast<size_t>(y) * pw + x] * 255.0;
            const long r = std::lround(v);
            out.at(y, x) = static_cast<uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
        }
    return out;
}

namespace {

template <typename T>
void wr(std::ofstream& os, const T& v, const std::string& path) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
    if (!os) throw IoError("write failed: " + path);
}
template <typename T>
void rd(std::ifstream& is, T& v, const std::string& path) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (is.gcount() != sizeof(T)) throw FormatError("truncated model file: " + path);
}

} // namespace

void save_model(const CnnModel& m, const std::string& path) {
    check_model(m);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os.write("ARCN", 4);
    wr(os, uint32_t{1}, path); // format version
    wr(os, m.distance_tag, path);
    wr(os, static_cast<uint32_t>(m.layers.size()), path);
    for (const auto& L : m.layers) {
        wr(os, static_cast<uint32_t>(L.kh), path);
        wr(os, static_cast<uint32_t>(L.kw), path);
        wr(os, static_cast<uint32_t>(L.cin), path);
        wr(os, static_cast<uint32_t>(L.cout), path);
        wr(os, static_cast<uint32_t>(L.act), path);
        os.write(reinterpret_cast<const char*>(L.weights.data()),
                 static_cast<std::streamsize>(L.weights.size() * sizeof(double)));
        os.write(reinterpret_cast<const char*>(L.biases.data()),
                 static_cast<std::streamsize>(L.biases.size() * sizeof(double)));
        if (!os) throw IoError("write failed: " + path);
    }
}

CnnModel load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (is.gcount() != 4 || std::memcmp(magic, "ARCN", 4) != 0)
        throw FormatError("bad magic (expected ARCN): " + path);
    uint32_t version = 0;
    rd(is, version, path);
    if (version != 1) throw FormatError("unsupported model version: " + path);

    CnnModel m;
    rd(is, m.distance_tag, path);
    uint32_t nl = 0;
    rd(is, nl, path);
    if (nl == 0 || nl > 64) throw FormatError("implausible layer count: " + path);
    for (uint32_t i = 0; i < nl; ++i) {
        uint32_t kh, kw, cin, cout, act;
        rd(is, kh, path);
        rd(is, kw, path);
        rd(is, cin, path);
        rd(is, cout, path);
        rd(is, act, path);
        if (kh > 255 || kw > 255 || cin > 4096 || cout > 4096 || act > 1)
            throw FormatError("implausible layer shape: " + path);
        ConvLayer L;
        L.kh = static_cast<int>(kh);
        L.kw = static_cast<int>(kw);
        L.cin = static_cast<int>(cin);
        L.cout = static_cast<int>(cout);
        L.act = static_cast<Activation>(act);
        L.weights.resize(L.weight_count());
        L.biases.resize(cout);
        is.read(reinterpret_cast<char*>(L.weights.data()),
                static_cast<std::streamsize>(L.weights.size() * sizeof(double)));
        if (is.gcount() != static_cast<std::streamsize>(L.weights.size() * sizeof(double)))
            throw FormatError("truncated model file: " + path);
        is.read(reinterpret_cast<char*>(L.biases.data()),
                static_cast<std::streamsize>(L.biases.size() * sizeof(double)));
        if (is.gcount() != static_cast<std::streamsize>(L.biases.size() * sizeof(double)))
            throw FormatError("truncated model file: " + path);
        m.layers.push_back(std::move(L));
    }
    if (is.peek() != EOF) throw FormatError("trailing bytes in model file: " + path);
    try {
        check_model(m);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("inconsistent model: ") + e.what() + ": " + path);
    }
    return m;
}

} // namespace cghc
