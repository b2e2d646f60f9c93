#include "finsler/fd.hpp"

#include <array>
#include <cstddef>
#include <stdexcept>

namespace finsler::fd {

namespace {

struct Stencil {
    std::vector<int> offsets;
    std::vector<double> weights;  // divided by h^k at evaluation time
};

// Second-order-accurate central stencils for derivative orders 0..4.
Stencil stencil_for(int k) {
    switch (k) {
        case 0: return {{0}, {1.0}};
        case 1: return {{-1, 1}, {-0.5, 0.5}};
        case 2: return {{-1, 0, 1}, {1.0, -2.0, 1.0}};
        case 3: return {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}};
        case 4: return {{-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}};
        default: throw std::invalid_argument("fd: stencils implemented up to 4th order");
    }
}

double tensor_stencil(const ScalarFn& f, std::span<const double> point, std::span<const int> alpha,
                      double h) {
    const std::size_t nv = point.size();
    std::vector<Stencil> st;
    std::vector<std::size_t> active;
    double scale = 1.0;
    int total = 0;
    for (std::size_t v = 0; v < nv; ++v) {
        int k = alpha[v];
        total += k;
        if (k == 0) continue;
        st.push_back(stencil_for(k));
        active.push_back(v);
        for (int i = 0; i < k; ++i) scale *= h;
    }
    if (total == 0) return f(point);

    std::vector<double> q(point.begin(), point.end());
    std::vector<std::size_t> idx(st.size(), 0);
    double acc = 0.0;
    for (;;) {
        double w = 1.0;
        for (std::size_t s = 0; s < st.size(); ++s) {
            q[active[s]] = point[active[s]] + st[s].offsets[idx[s]] * h;
            w *= st[s].weights[idx[s]];
        }
        acc += w * f(q);
        std::size_t s = 0;
        for (; s < st.size(); ++s) {
            if (++idx[s] < st[s].offsets.size()) break;
            idx[s] = 0;
            q[active[s]] = point[active[s]];
        }
        if (s == st.size()) break;
    }
    return acc / scale;
}

}  // namespace

double step_for_order(int total_order) {
    // Roundoff grows like eps/h^k and Richardson halves h, so higher orders
    // need wider stencils to stay above the noise floor.
    if (total_order <= 1) return 1e-4;
    if (total_order == 2) return 5e-4;
    if (total_order == 3) return 4e-3;
    return 1e-2;
}

double partial(const ScalarFn& f, std::span<const double> point, std::span<const int> alpha,
               double h) {
    // Richardson: the composite stencil truncation is O(h^2).
    double ih = tensor_stencil(f, point, alpha, h);
    double ih2 = tensor_stencil(f, point, alpha, h / 2.0);
    return (4.0 * ih2 - ih) / 3.0;
}

double partial(const ScalarFn& f, std::span<const double> point, std::span<const int> alpha) {
    int total = 0;
    for (int a : alpha) total += a;
    return partial(f, point, alpha, step_for_order(total));
}

}  // namespace finsler::fd
