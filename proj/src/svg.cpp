#include "covshap/svg.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "covshap/common.hpp"

namespace covshap {

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(2);
    ss << std::fixed << v;
    return ss.str();
}

}  // namespace

std::string importance_bar_svg(const ImportanceReport& report, const std::string& title) {
    const int d = static_cast<int>(report.features.size());
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return report.features[a].s_index < report.features[b].s_index;
    });
    double vmax = 0.0;
    for (const auto& f : report.features) vmax = std::max(vmax, f.mean_abs_shap);

    const double row_h = 24, label_w = 90, chart_w = 420, margin = 10, top = 40;
    const double width = label_w + chart_w + 2 * margin;
    const double height = top + d * row_h + margin;

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
        << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width) << " "
        << num(height) << "\">\n"
        << "  <title>" << xml_escape(title) << "</title>\n"
        << "  <text x=\"" << num(margin) << "\" y=\"20\" font-family=\"sans-serif\" "
           "font-size=\"14\">"
        << xml_escape(title) << "</text>\n";
    for (int i = 0; i < d; ++i) {
        const auto& f = report.features[order[i]];
        double y = top + i * row_h;
        double w = vmax > 0.0 ? f.mean_abs_shap / vmax * chart_w : 0.0;
        const char* fill = f.sign > 0 ? "#08519c" : (f.sign < 0 ? "#9ecae1" : "#bdbdbd");
        svg << "  <text x=\"" << num(label_w - 6) << "\" y=\"" << num(y + row_h * 0.65)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << xml_escape(f.name) << "</text>\n";
        svg << "  <rect id=\"bar-" << xml_escape(f.name) << "\" x=\"" << num(label_w)
            << "\" y=\"" << num(y + 4) << "\" width=\"" << num(w) << "\" height=\""
            << num(row_h - 8) << "\" fill=\"" << fill << "\"/>\n";
        svg << "  <text x=\"" << num(label_w + w + 4) << "\" y=\"" << num(y + row_h * 0.65)
            << "\" font-family=\"sans-serif\" font-size=\"10\">"
            << num(f.mean_abs_shap) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string robustness_strip_svg(const RobustnessReport& report, const std::string& title) {
    const int d = static_cast<int>(report.features.size());
    const int n_perms = static_cast<int>(report.s_index.rows());

    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return report.reference[a] < report.reference[b];
    });

    const double col_w = 46, left = 60, top = 40, bottom = 60;
    const double plot_h = 260;
    const double width = left + d * col_w + 20;
    const double height = top + plot_h + bottom;
    auto y_of = [&](double s_index) {
        return top + (s_index - 1.0) / std::max(1, d - 1) * plot_h;
    };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
        << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width) << " "
        << num(height) << "\">\n"
        << "  <title>" << xml_escape(title) << "</title>\n"
        << "  <text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
        << xml_escape(title) << "</text>\n"
        << "  <text x=\"14\" y=\"" << num(top + plot_h / 2)
        << "\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 14 "
        << num(top + plot_h / 2) << ")\" text-anchor=\"middle\">S_I</text>\n";
    for (int r = 1; r <= d; ++r) {
        svg << "  <text x=\"" << num(left - 8) << "\" y=\"" << num(y_of(r) + 3)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"9\">" << r
            << "</text>\n";
    }
    for (int i = 0; i < d; ++i) {
        int j = order[i];
        double cx = left + i * col_w + col_w / 2;
        svg << "  <g id=\"feature-" << xml_escape(report.features[j]) << "\">\n";
        for (int p = 0; p < n_perms; ++p) {
            // deterministic horizontal jitter by permutation index
            double jitter = ((p % 7) - 3) * 2.2;
            svg << "    <circle cx=\"" << num(cx + jitter) << "\" cy=\""
                << num(y_of(report.s_index(p, j))) << "\" r=\"2.4\" fill=\"#555555\" "
                   "fill-opacity=\"0.55\"/>\n";
        }
        svg << "    <circle cx=\"" << num(cx) << "\" cy=\""
            << num(y_of(report.reference[j])) << "\" r=\"3.6\" fill=\"#d62728\"/>\n";
        svg << "    <text x=\"" << num(cx) << "\" y=\"" << num(top + plot_h + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << xml_escape(report.features[j]) << "</text>\n";
        svg << "  </g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << content;
}

}  // namespace covshap
