// Minimal native SVG plots: scatter panels and box plots.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "lgbandit/harness.hpp"

namespace lgb {

namespace {

std::string num(double x, int precision = 2)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

std::string tick_label(double x)
{
    if (x != 0.0 && (std::abs(x) >= 1e4 || std::abs(x) < 1e-2)) {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, 0);
        return std::string(buf, res.ptr);
    }
    std::string s = num(x, 2);
    while (s.find('.') != std::string::npos && (s.back() == '0' || s.back() == '.')) {
        const bool dot = s.back() == '.';
        s.pop_back();
        if (dot) break;
    }
    return s;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

class Svg {
public:
    Svg(double w, double h) : w_(w), h_(h) {}

    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0,
              const std::string& dash = "")
    {
        body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
              << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << '"';
        if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << '"';
        body_ << "/>\n";
    }
    void circle(double x, double y, double r, const std::string& fill, double opacity = 0.7)
    {
        body_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r) << "\" fill=\"" << fill
              << "\" fill-opacity=\"" << num(opacity) << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke)
    {
        body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
              << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, const std::string& anchor = "middle", double size = 11,
              double rotate = 0.0)
    {
        body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\""
              << num(size) << "\" text-anchor=\"" << anchor << '"';
        if (rotate != 0.0) body_ << " transform=\"rotate(" << num(rotate) << ' ' << num(x) << ' ' << num(y) << ")\"";
        body_ << '>' << escape(s) << "</text>\n";
    }
    void comment(const std::string& s) { body_ << "<!-- " << escape(s) << " -->\n"; }

    void save(const std::string& path) const
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write '" + path + "'");
        f << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
          << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_, 0) << "\" height=\"" << num(h_, 0)
          << "\" viewBox=\"0 0 " << num(w_, 0) << ' ' << num(h_, 0) << "\">\n"
          << "<rect x=\"0\" y=\"0\" width=\"" << num(w_, 0) << "\" height=\"" << num(h_, 0) << "\" fill=\"white\"/>\n"
          << body_.str() << "</svg>\n";
    }

private:
    double w_;
    double h_;
    std::ostringstream body_;
};

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    double unit(double v) const
    {
        if (log) return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
        return (v - lo) / (hi - lo);
    }

    std::vector<double> ticks() const
    {
        std::vector<double> out;
        if (log) {
            for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1.0) {
                const double v = std::pow(10.0, e);
                if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) out.push_back(v);
            }
            if (out.size() < 2) out = {lo, hi};
            return out;
        }
        const double raw = (hi - lo) / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        }
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
        return out;
    }
};

Axis fit_axis(const std::vector<double>& values, bool log)
{
    Axis a;
    a.log = log;
    if (values.empty()) return a;
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (log) {
        if (hi <= lo) hi = lo * 10.0, lo = lo / 10.0;
        a.lo = std::pow(10.0, std::floor(std::log10(lo) * 10.0) / 10.0 - 0.1);
        a.hi = std::pow(10.0, std::ceil(std::log10(hi) * 10.0) / 10.0 + 0.1);
    } else {
        if (hi <= lo) hi = lo + 1.0, lo = lo - 1.0;
        const double pad = 0.05 * (hi - lo);
        a.lo = lo - pad;
        a.hi = hi + pad;
    }
    return a;
}

struct Panel {
    double x0, y0, w, h;
    Axis x, y;

    double px(double v) const { return x0 + x.unit(v) * w; }
    double py(double v) const { return y0 + h - y.unit(v) * h; }

    void frame(Svg& svg, const std::string& title, const std::string& xlabel, const std::string& ylabel) const
    {
        svg.rect(x0, y0, w, h, "none", "black");
        for (double t : x.ticks()) {
            svg.line(px(t), y0 + h, px(t), y0 + h + 4, "black");
            svg.text(px(t), y0 + h + 16, tick_label(t), "middle", 10);
        }
        for (double t : y.ticks()) {
            svg.line(x0 - 4, py(t), x0, py(t), "black");
            svg.text(x0 - 6, py(t) + 3, tick_label(t), "end", 10);
        }
        svg.text(x0 + w / 2, y0 - 8, title, "middle", 12);
        if (!xlabel.empty()) svg.text(x0 + w / 2, y0 + h + 32, xlabel, "middle", 11);
        if (!ylabel.empty()) svg.text(x0 - 42, y0 + h / 2, ylabel, "middle", 11, -90);
    }

    // Diagonal y = x over the shared part of both ranges.
    void diagonal(Svg& svg, const std::string& color) const
    {
        const double lo = std::max(x.lo, y.lo);
        const double hi = std::min(x.hi, y.hi);
        if (hi > lo) svg.line(px(lo), py(lo), px(hi), py(hi), color, 1.2, "5,4");
    }
};

template <typename T>
std::vector<T> unique_in_order(const std::vector<T>& v)
{
    std::vector<T> out;
    for (const auto& x : v) {
        if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
    }
    return out;
}

constexpr double kPanelW = 300;
constexpr double kPanelH = 240;
constexpr double kMarginL = 70;
constexpr double kMarginT = 50;
constexpr double kGapX = 90;
constexpr double kGapY = 80;

}  // namespace

bool write_regret_scatter_svg(const std::string& path, const std::vector<EpisodeResult>& episodes,
                              std::uint64_t seed)
{
    // Per (dist, env): mean normalized regret over runs for each policy.
    struct Acc {
        double sum_kucb = 0, sum_idea = 0;
        std::size_t n_kucb = 0, n_idea = 0;
    };
    std::map<std::pair<int, std::size_t>, Acc> acc;
    std::vector<Distribution> dists;
    for (const auto& e : episodes) {
        if (e.excluded || !e.normalized || e.nu != 0.0) continue;
        if (e.policy != PolicyId::kalman_ucb && e.policy != PolicyId::idea) continue;
        auto& a = acc[{static_cast<int>(e.dist), e.env}];
        if (e.policy == PolicyId::kalman_ucb) a.sum_kucb += *e.normalized, ++a.n_kucb;
        else a.sum_idea += *e.normalized, ++a.n_idea;
        dists.push_back(e.dist);
    }
    dists = unique_in_order(dists);
    if (dists.empty()) return false;

    const std::size_t cols = std::min<std::size_t>(3, dists.size());
    const std::size_t rows = (dists.size() + cols - 1) / cols;
    Svg svg(kMarginL + cols * (kPanelW + kGapX), kMarginT + rows * (kPanelH + kGapY));
    svg.comment("normalized regret per environment, master seed " + std::to_string(seed));
    bool any = false;
    for (std::size_t di = 0; di < dists.size(); ++di) {
        std::vector<std::pair<double, double>> pts;
        std::size_t omitted = 0;
        for (const auto& [key, a] : acc) {
            if (key.first != static_cast<int>(dists[di]) || a.n_kucb == 0 || a.n_idea == 0) continue;
            const double x = a.sum_kucb / static_cast<double>(a.n_kucb);
            const double y = a.sum_idea / static_cast<double>(a.n_idea);
            if (x > 0 && y > 0) pts.emplace_back(x, y);
            else ++omitted;
        }
        std::vector<double> all;
        for (auto [x, y] : pts) all.push_back(x), all.push_back(y);
        const Axis axis = fit_axis(all, true);
        const Panel p{kMarginL + static_cast<double>(di % cols) * (kPanelW + kGapX),
                      kMarginT + static_cast<double>(di / cols) * (kPanelH + kGapY), kPanelW, kPanelH, axis, axis};
        p.frame(svg, std::string(to_string(dists[di])), "Kalman-UCB normalized regret", "IDEA normalized regret");
        p.diagonal(svg, "red");
        for (auto [x, y] : pts) svg.circle(p.px(x), p.py(y), 2.5, "black");
        if (omitted > 0) {
            svg.text(p.x0 + 6, p.y0 + 14, std::to_string(omitted) + " nonpositive omitted", "start", 10);
        }
        any = any || !pts.empty() || omitted > 0;
    }
    if (!any) return false;
    svg.save(path);
    return true;
}

bool write_interval_scatter_svg(const std::string& path, const std::vector<MetricRow>& rows, std::uint64_t seed)
{
    std::vector<Distribution> dists;
    for (const auto& r : rows) {
        if (r.ok && !r.idea.empty) dists.push_back(r.dist);
    }
    dists = unique_in_order(dists);
    if (dists.empty()) return false;

    const std::size_t cols = std::min<std::size_t>(3, dists.size());
    const std::size_t nrows = (dists.size() + cols - 1) / cols;
    Svg svg(kMarginL + cols * (kPanelW + kGapX), kMarginT + nrows * (kPanelH + kGapY));
    svg.comment("phi intervals (red: lower end, blue: upper end), master seed " + std::to_string(seed));
    for (std::size_t di = 0; di < dists.size(); ++di) {
        std::vector<double> all;
        for (const auto& r : rows) {
            if (r.dist != dists[di] || !r.ok || r.idea.empty) continue;
            all.insert(all.end(), {r.kalman_ucb.min, r.idea.min, r.kalman_ucb.max, r.idea.max});
        }
        const bool log = std::all_of(all.begin(), all.end(), [](double v) { return v > 0.0; });
        const Axis axis = fit_axis(all, log);
        const Panel p{kMarginL + static_cast<double>(di % cols) * (kPanelW + kGapX),
                      kMarginT + static_cast<double>(di / cols) * (kPanelH + kGapY), kPanelW, kPanelH, axis, axis};
        p.frame(svg, std::string(to_string(dists[di])), "Kalman-UCB interval", "IDEA interval");
        p.diagonal(svg, "black");
        for (const auto& r : rows) {
            if (r.dist != dists[di] || !r.ok || r.idea.empty) continue;
            svg.circle(p.px(r.kalman_ucb.min), p.py(r.idea.min), 2.5, "red");
            svg.circle(p.px(r.kalman_ucb.max), p.py(r.idea.max), 2.5, "blue");
        }
    }
    svg.save(path);
    return true;
}

bool write_robustness_svg(const std::string& path, const std::vector<EpisodeResult>& episodes, std::uint64_t seed)
{
    std::vector<PerturbTarget> targets;
    std::vector<double> nus;
    std::vector<PolicyId> policies;
    for (const auto& e : episodes) {
        if (e.excluded || !e.normalized || e.nu == 0.0) continue;
        targets.push_back(e.target);
        nus.push_back(e.nu);
        policies.push_back(e.policy);
    }
    targets = unique_in_order(targets);
    nus = unique_in_order(nus);
    policies = unique_in_order(policies);
    std::sort(nus.begin(), nus.end());
    if (targets.empty()) return false;

    Svg svg(kMarginL + nus.size() * (kPanelW + kGapX), kMarginT + targets.size() * (kPanelH + kGapY));
    svg.comment("normalized regret under perturbation, master seed " + std::to_string(seed));
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        for (std::size_t ni = 0; ni < nus.size(); ++ni) {
            std::vector<std::optional<SummaryStats>> stats;
            std::vector<std::vector<double>> outliers;
            std::vector<double> all;
            for (PolicyId pol : policies) {
                std::vector<double> v;
                for (const auto& e : episodes) {
                    if (!e.excluded && e.normalized && e.target == targets[ti] && e.nu == nus[ni] && e.policy == pol) {
                        v.push_back(*e.normalized);
                    }
                }
                auto s = summarize_values(v);
                std::vector<double> out;
                if (s) {
                    for (double x : v) {
                        if (x < s->whisker_low || x > s->whisker_high) out.push_back(x);
                    }
                    all.insert(all.end(), {s->whisker_low, s->whisker_high});
                    all.insert(all.end(), out.begin(), out.end());
                }
                stats.push_back(s);
                outliers.push_back(std::move(out));
            }
            Axis yaxis = fit_axis(all, false);
            const Panel p{kMarginL + static_cast<double>(ni) * (kPanelW + kGapX),
                          kMarginT + static_cast<double>(ti) * (kPanelH + kGapY), kPanelW, kPanelH,
                          Axis{0.0, static_cast<double>(policies.size()), false}, yaxis};
            const std::string title = std::string(to_string(targets[ti])) + " perturbed, nu = " + tick_label(nus[ni]);
            svg.rect(p.x0, p.y0, p.w, p.h, "none", "black");
            for (double t : yaxis.ticks()) {
                svg.line(p.x0 - 4, p.py(t), p.x0, p.py(t), "black");
                svg.text(p.x0 - 6, p.py(t) + 3, tick_label(t), "end", 10);
            }
            svg.text(p.x0 + p.w / 2, p.y0 - 8, title, "middle", 12);
            svg.text(p.x0 - 42, p.y0 + p.h / 2, "normalized regret", "middle", 11, -90);
            for (std::size_t pi = 0; pi < policies.size(); ++pi) {
                const double cx = p.px(static_cast<double>(pi) + 0.5);
                const double bw = 0.5 * p.w / static_cast<double>(policies.size());
                svg.text(cx, p.y0 + p.h + 16, std::string(to_string(policies[pi])), "middle", 10);
                if (!stats[pi]) continue;
                const auto& s = *stats[pi];
                const std::string color = colors[pi % 6];
                svg.line(cx, p.py(s.whisker_low), cx, p.py(s.q1), "black");
                svg.line(cx, p.py(s.q3), cx, p.py(s.whisker_high), "black");
                svg.line(cx - bw / 4, p.py(s.whisker_low), cx + bw / 4, p.py(s.whisker_low), "black");
                svg.line(cx - bw / 4, p.py(s.whisker_high), cx + bw / 4, p.py(s.whisker_high), "black");
                svg.rect(cx - bw / 2, p.py(s.q3), bw, std::max(0.5, p.py(s.q1) - p.py(s.q3)), color, "black");
                svg.line(cx - bw / 2, p.py(s.median), cx + bw / 2, p.py(s.median), "black", 2.0);
                for (double o : outliers[pi]) svg.circle(cx, p.py(o), 2.0, "none", 1.0), svg.circle(cx, p.py(o), 1.5, color, 0.8);
            }
        }
    }
    svg.save(path);
    return true;
}

}  // namespace lgb
