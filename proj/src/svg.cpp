#include "covlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "covlab/common.hpp"

namespace covlab {

namespace {

std::string fmt2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string fmt3(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

// Round a raw interval up to a 1/2/5 x 10^k tick step.
double nice_step(double range) {
    if (!(range > 0.0)) return 1.0;
    const double raw = range / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    double step;
    if (f < 1.5) {
        step = 1.0;
    } else if (f < 3.5) {
        step = 2.0;
    } else if (f < 7.5) {
        step = 5.0;
    } else {
        step = 10.0;
    }
    return step * mag;
}

struct LineStyle {
    double width = 1.5;
    const char* dash = "";  // empty: solid
};

LineStyle style_for_n(int n) {
    switch (n) {
        case 80:
            return {1.0, ""};
        case 90:
            return {1.5, "6 4"};
        case 100:
            return {1.8, "1.5 3"};
        case 110:
            return {1.5, "8 3 1.5 3"};
        case 120:
            return {2.5, ""};
        default:
            return {1.5, ""};
    }
}

// Maps data coordinates into one panel's pixel rectangle (y axis flipped).
struct PanelFrame {
    double px = 0.0, py = 0.0;      // top-left of the plot rectangle
    double pw = 0.0, ph = 0.0;      // plot rectangle size
    double xmin = 0.0, xmax = 1.0;  // data ranges
    double ymin = 0.0, ymax = 1.0;

    double x(double u) const { return px + (u - xmin) / (xmax - xmin) * pw; }
    double y(double v) const { return py + ph - (v - ymin) / (ymax - ymin) * ph; }
};

class SvgDoc {
  public:
    SvgDoc(double width, double height) : width_(width), height_(height) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(width)
             << "\" height=\"" << fmt2(height) << "\" viewBox=\"0 0 " << fmt2(width) << ' '
             << fmt2(height) << "\">\n";
        out_ << "<rect x=\"0\" y=\"0\" width=\"" << fmt2(width) << "\" height=\"" << fmt2(height)
             << "\" fill=\"#ffffff\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const char* stroke, double width,
              const char* dash = "") {
        out_ << "<line x1=\"" << fmt2(x1) << "\" y1=\"" << fmt2(y1) << "\" x2=\"" << fmt2(x2)
             << "\" y2=\"" << fmt2(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
             << fmt2(width) << '"';
        if (dash[0] != '\0') out_ << " stroke-dasharray=\"" << dash << '"';
        out_ << "/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke,
                  double width, const char* dash = "") {
        if (pts.empty()) return;
        out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
             << fmt2(width) << '"';
        if (dash[0] != '\0') out_ << " stroke-dasharray=\"" << dash << '"';
        out_ << " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) out_ << ' ';
            out_ << fmt2(pts[i].first) << ',' << fmt2(pts[i].second);
        }
        out_ << "\"/>\n";
    }

    void circle(double cx, double cy, double r, const char* fill) {
        out_ << "<circle cx=\"" << fmt2(cx) << "\" cy=\"" << fmt2(cy) << "\" r=\"" << fmt2(r)
             << "\" fill=\"" << fill << "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const char* stroke) {
        out_ << "<rect x=\"" << fmt2(x) << "\" y=\"" << fmt2(y) << "\" width=\"" << fmt2(w)
             << "\" height=\"" << fmt2(h) << "\" fill=\"none\" stroke=\"" << stroke
             << "\" stroke-width=\"1.00\"/>\n";
    }

    void text(double x, double y, const std::string& content, double size,
              const char* anchor = "start") {
        out_ << "<text x=\"" << fmt2(x) << "\" y=\"" << fmt2(y) << "\" font-family=\"monospace\""
             << " font-size=\"" << fmt2(size) << "\" text-anchor=\"" << anchor << "\" fill=\"#000000\">"
             << escape(content) << "</text>\n";
    }

    void save(const std::string& path) {
        out_ << "</svg>\n";
        std::ofstream file(path, std::ios::binary);
        if (!file) throw ParameterError("cannot open " + path + " for writing");
        const std::string body = out_.str();
        file.write(body.data(), static_cast<std::streamsize>(body.size()));
        file.flush();
        if (!file) throw Error("write failed for " + path);
    }

  private:
    static std::string escape(const std::string& s) {
        std::string out;
        out.reserve(s.size());
        for (char ch : s) {
            switch (ch) {
                case '&':
                    out += "&amp;";
                    break;
                case '<':
                    out += "&lt;";
                    break;
                case '>':
                    out += "&gt;";
                    break;
                default:
                    out += ch;
            }
        }
        return out;
    }

    double width_;
    double height_;
    std::ostringstream out_;
};

void draw_axes(SvgDoc& doc, const PanelFrame& f, const std::string& xlabel,
               const std::string& ylabel) {
    doc.rect(f.px, f.py, f.pw, f.ph, "#333333");

    const double xstep = nice_step(f.xmax - f.xmin);
    const long ix0 = static_cast<long>(std::ceil(f.xmin / xstep - 1e-9));
    const long ix1 = static_cast<long>(std::floor(f.xmax / xstep + 1e-9));
    for (long i = ix0; i <= ix1; ++i) {
        const double u = static_cast<double>(i) * xstep;
        const double x = f.x(u);
        doc.line(x, f.py + f.ph, x, f.py + f.ph + 4.0, "#333333", 1.0);
        doc.text(x, f.py + f.ph + 16.0, fmt_g(u), 10.0, "middle");
    }

    const double ystep = nice_step(f.ymax - f.ymin);
    const long iy0 = static_cast<long>(std::ceil(f.ymin / ystep - 1e-9));
    const long iy1 = static_cast<long>(std::floor(f.ymax / ystep + 1e-9));
    for (long i = iy0; i <= iy1; ++i) {
        const double v = static_cast<double>(i) * ystep;
        const double y = f.y(v);
        doc.line(f.px - 4.0, y, f.px, y, "#333333", 1.0);
        doc.text(f.px - 7.0, y + 3.5, fmt_g(v), 10.0, "end");
    }

    doc.text(f.px + f.pw / 2.0, f.py + f.ph + 32.0, xlabel, 11.0, "middle");
    doc.text(f.px, f.py - 8.0, ylabel, 11.0, "start");
}

}  // namespace

void write_screening_svg(const ExperimentReport& report, const std::string& path) {
    if (report.config.kind != ExperimentKind::Screening) {
        throw ParameterError("write_screening_svg: report is not a screening report");
    }
    const std::vector<double>& sigmas = report.config.sigma_values;
    const int npanel = static_cast<int>(sigmas.size());

    const double plot_w = 360.0, plot_h = 280.0;
    const double ml = 54.0, mr = 18.0, mt = 40.0, mb = 50.0;
    const double panel_w = ml + plot_w + mr;
    const double total_w = panel_w * npanel;
    const double total_h = mt + plot_h + mb;

    SvgDoc doc(total_w, total_h);
    const double size_max = std::max(1, report.config.max_model_size);

    for (int pi = 0; pi < npanel; ++pi) {
        const double sigma = sigmas[static_cast<std::size_t>(pi)];
        PanelFrame f;
        f.px = panel_w * pi + ml;
        f.py = mt;
        f.pw = plot_w;
        f.ph = plot_h;
        f.xmin = 0.0;
        f.xmax = size_max;
        f.ymin = 0.0;
        f.ymax = 1.0;

        draw_axes(doc, f, "model size", "probability");
        doc.text(f.px + f.pw / 2.0, f.py - 22.0, "sigma = " + fmt_g(sigma), 12.0, "middle");

        // Legend block in the lower-right corner of the panel.
        double ly = f.py + f.ph - 12.0;
        for (const ScreeningCurve& curve : report.screening_curves) {
            if (curve.sigma != sigma) continue;
            const LineStyle st = style_for_n(curve.n);

            std::vector<std::pair<double, double>> pts;
            pts.reserve(curve.probability.size());
            for (std::size_t s = 0; s < curve.probability.size(); ++s) {
                pts.emplace_back(f.x(static_cast<double>(s + 1)), f.y(curve.probability[s]));
            }
            doc.polyline(pts, "#000000", st.width, st.dash);

            const double lx = f.px + f.pw - 108.0;
            doc.line(lx, ly - 3.5, lx + 30.0, ly - 3.5, "#000000", st.width, st.dash);
            doc.text(lx + 36.0, ly, "n = " + std::to_string(curve.n), 10.0);
            ly -= 14.0;
        }
    }
    doc.save(path);
}

void write_qq_svg(const QQSeries& series, const std::string& path) {
    const double plot_w = 300.0, plot_h = 300.0;
    const double ml = 54.0, mr = 18.0, mt = 46.0, mb = 50.0;
    const double panel_w = ml + plot_w + mr;
    const double total_w = panel_w * 2.0;
    const double total_h = mt + plot_h + mb;

    SvgDoc doc(total_w, total_h);
    doc.text(total_w / 2.0, 16.0,
             "c0 = " + fmt_g(series.c0) + ", c = " + fmt_g(series.c) + " (m = " +
                 std::to_string(series.statistics.size()) + ", skipped = " +
                 std::to_string(series.skipped) + ")",
             12.0, "middle");

    struct Panel {
        const Eigen::VectorXd* q;
        const char* label;
        double ks;
    };
    const Panel panels[2] = {{&series.q_exp1, "Exp(1) quantile", series.ks_exp1},
                             {&series.q_chisq1, "chi-sq(1) quantile", series.ks_chisq1}};

    for (int pi = 0; pi < 2; ++pi) {
        const Eigen::VectorXd& q = *panels[pi].q;
        double hi = 1.0;
        if (q.size() > 0) hi = std::max(q.maxCoeff(), series.statistics.maxCoeff());
        hi *= 1.05;

        PanelFrame f;
        f.px = panel_w * pi + ml;
        f.py = mt;
        f.pw = plot_w;
        f.ph = plot_h;
        f.xmin = 0.0;
        f.xmax = hi;
        f.ymin = 0.0;
        f.ymax = hi;

        draw_axes(doc, f, panels[pi].label, "sample quantile");
        doc.text(f.px + f.pw / 2.0, f.py - 8.0, std::string("KS = ") + fmt3(panels[pi].ks), 11.0,
                 "middle");

        doc.line(f.x(0.0), f.y(0.0), f.x(hi), f.y(hi), "#888888", 1.0, "5 4");
        for (Eigen::Index i = 0; i < q.size(); ++i) {
            doc.circle(f.x(q[i]), f.y(series.statistics[i]), 2.2, "#1f4e9c");
        }
    }
    doc.save(path);
}

}  // namespace covlab
