#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "hsac/training_harness.hpp"

namespace hsac {

namespace {

struct Point {
    double x, y;
};

struct Box {
    double x0 = std::numeric_limits<double>::infinity();
    double x1 = -std::numeric_limits<double>::infinity();
    double y0 = std::numeric_limits<double>::infinity();
    double y1 = -std::numeric_limits<double>::infinity();

    void add(Point p) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) return;
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    bool empty() const { return !(x0 <= x1); }
    void pad() {
        if (empty()) *this = {0.0, 1.0, 0.0, 1.0};
        if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
        if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Maps data coordinates into a panel rectangle (SVG y grows downward).
struct Frame {
    double left, top, width, height;
    Box box;

    Point map(Point p) const {
        return {left + (p.x - box.x0) / (box.x1 - box.x0) * width,
                top + height - (p.y - box.y0) / (box.y1 - box.y0) * height};
    }
};

std::string polyline(const Frame& f, const std::vector<Point>& pts, const char* colour, double stroke = 1.5) {
    std::string s = "<polyline fill=\"none\" stroke=\"";
    s += colour;
    s += "\" stroke-width=\"" + num(stroke) + "\" points=\"";
    for (const auto& p : pts) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
        const Point q = f.map(p);
        s += num(q.x) + "," + num(q.y) + " ";
    }
    s += "\"/>\n";
    return s;
}

std::string text(double x, double y, const std::string& body, const char* anchor = "start", int size = 12) {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
           "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\">" + body + "</text>\n";
}

std::string axes(const Frame& f, const std::string& title, const std::string& x_name) {
    std::string s = "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" + num(f.width) +
                    "\" height=\"" + num(f.height) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    s += text(f.left, f.top - 6, title, "start", 13);
    s += text(f.left + f.width, f.top + f.height + 16, x_name, "end");
    s += text(f.left - 4, f.top + 10, label(f.box.y1), "end", 10);
    s += text(f.left - 4, f.top + f.height, label(f.box.y0), "end", 10);
    s += text(f.left, f.top + f.height + 16, label(f.box.x0), "start", 10);
    return s;
}

std::string header(int width, int height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
           std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " + std::to_string(height) +
           "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

// Oblique projection: east to the right, altitude up, north receding at 30 deg.
Point project(const UcavState& s) {
    constexpr double depth = 0.5;
    const double c = std::cos(kPi / 6.0), sn = std::sin(kPi / 6.0);
    return {s.y + depth * s.x * c, s.altitude() + depth * s.x * sn};
}

std::vector<Point> moving_average(const std::vector<Point>& pts, std::size_t window) {
    std::vector<Point> out;
    double sum = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        sum += pts[i].y;
        if (i >= window) sum -= pts[i - window].y;
        const auto n = std::min(i + 1, window);
        out.push_back({pts[i].x, sum / static_cast<double>(n)});
    }
    return out;
}

}  // namespace

std::string trajectory_svg(const EpisodeTrace& trace) {
    std::vector<Point> blue, red;
    Box box;
    for (std::size_t i = 0; i < trace.blue_states.size(); ++i) {
        blue.push_back(project(trace.blue_states[i]));
        red.push_back(project(trace.red_states[i]));
        box.add(blue.back());
        box.add(red.back());
    }
    box.pad();
    // Equal scale on both screen axes.
    const double span = std::max(box.x1 - box.x0, box.y1 - box.y0);
    const double cx = 0.5 * (box.x0 + box.x1), cy = 0.5 * (box.y0 + box.y1);
    box = {cx - 0.55 * span, cx + 0.55 * span, cy - 0.55 * span, cy + 0.55 * span};
    const Frame f{60, 40, 600, 600, box};

    std::string s = header(720, 700);
    s += "<rect x=\"60\" y=\"40\" width=\"600\" height=\"600\" fill=\"none\" stroke=\"#444\"/>\n";
    s += text(60, 30, "trajectory (oblique: east right, altitude up, north receding)", "start", 13);
    s += polyline(f, blue, "#1f4fd1");
    s += polyline(f, red, "#d1301f");
    for (const auto& [pts, colour] : {std::pair{&blue, "#1f4fd1"}, std::pair{&red, "#d1301f"}}) {
        if (pts->empty()) continue;
        const Point p0 = f.map(pts->front());
        s += "<circle cx=\"" + num(p0.x) + "\" cy=\"" + num(p0.y) + "\" r=\"4\" fill=\"" + colour + "\"/>\n";
    }
    s += text(70, 670, "blue: " + to_string(trace.blue_outcome) + ", red: " + to_string(trace.red_outcome) +
                           ", steps: " + std::to_string(trace.steps.size()));
    s += "</svg>\n";
    return s;
}

std::string metrics_svg(const std::vector<nlohmann::json>& records) {
    std::vector<Point> blue, red, q, eval;
    for (const auto& r : records) {
        const auto type = r.value("type", std::string{});
        const double ep = r.value("episode", 0.0);
        if (type == "episode") {
            blue.push_back({ep, r.value("blue_sparse", 0.0)});
            red.push_back({ep, r.value("red_sparse", 0.0)});
            q.push_back({ep, r.value("q", 0.0)});
        } else if (type == "eval") {
            eval.push_back({ep, r.value("mean_sparse_return", 0.0)});
        }
    }
    const auto blue_avg = moving_average(blue, 50);
    const auto red_avg = moving_average(red, 50);

    auto frame = [](double top, const std::vector<const std::vector<Point>*>& series) {
        Box b;
        for (const auto* v : series)
            for (const auto& p : *v) b.add(p);
        b.pad();
        return Frame{70, top, 640, 180, b};
    };

    std::string s = header(760, 760);
    const Frame f1 = frame(40, {&blue, &red});
    s += axes(f1, "episode sparse return (thin) and 50-episode mean (thick): blue, red", "episode");
    s += polyline(f1, blue, "#9fb4ea", 0.8);
    s += polyline(f1, red, "#eaa9a0", 0.8);
    s += polyline(f1, blue_avg, "#1f4fd1", 2.0);
    s += polyline(f1, red_avg, "#d1301f", 2.0);

    const Frame f2 = frame(290, {&eval});
    s += axes(f2, "evaluation mean sparse return", "episode");
    s += polyline(f2, eval, "#2a8a3a", 2.0);

    Frame f3 = frame(540, {&q});
    f3.box.y0 = std::min(f3.box.y0, 0.0);
    f3.box.y1 = std::max(f3.box.y1, 1.0);
    s += axes(f3, "homotopy weight q", "episode");
    s += polyline(f3, q, "#6a3d9a", 2.0);
    s += "</svg>\n";
    return s;
}

}  // namespace hsac
