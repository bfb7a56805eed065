#include "hjlab/util.hpp"

#include <atomic>
#include <cstdio>

namespace hjlab {

namespace {
std::atomic<int> g_threads{0};
}

int default_thread_count() {
    int n = g_threads.load();
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

void set_default_thread_count(int n) { g_threads.store(n); }

void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& body,
                  int threads) {
    if (count <= 0) return;
    int nt = threads > 0 ? threads : default_thread_count();
    nt = static_cast<int>(std::min<std::int64_t>(nt, count));
    if (nt <= 1) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    const std::int64_t chunk = std::max<std::int64_t>(1, count / (8 * nt));
    auto worker = [&]() {
        for (;;) {
            std::int64_t begin = next.fetch_add(chunk);
            if (begin >= count) return;
            std::int64_t end = std::min(begin + chunk, count);
            for (std::int64_t i = begin; i < end; ++i) body(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    LineFit f;
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) {
        f.degenerate = true;
        return f;
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0) {
        f.degenerate = true;
        return f;
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ys[i] - (f.intercept + f.slope * xs[i]);
        ss += r * r;
    }
    f.residual_rms = std::sqrt(ss / n);
    return f;
}

LineFit fit_log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<double> lx, ly;
    lx.reserve(xs.size());
    ly.reserve(ys.size());
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
        if (xs[i] > 0 && ys[i] > 0) {
            lx.push_back(std::log(1.0 / xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    }
    LineFit f = fit_line(lx, ly);
    if (lx.size() != xs.size()) f.degenerate = true; // dropped nonpositive points
    return f;
}

std::string format_full(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace hjlab
