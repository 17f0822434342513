#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "boundary_layer.hpp"
#include "conformal_map.hpp"
#include "dyadic.hpp"
#include "errors.hpp"

namespace sobdens {

namespace detail {

/// Panel placement: disk or image coordinates to SVG pixels (y flipped).
struct Viewport {
    double x0, y0, scale, left, top;

    std::string pt(Complex z) const
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f,%.3f", left + (z.real() - x0) * scale, top + (y0 - z.imag()) * scale);
        return buf;
    }

    std::string path(const std::vector<Complex>& pts, bool closed) const
    {
        std::string d;
        for (std::size_t k = 0; k < pts.size(); ++k)
            d += (k == 0 ? "M" : " L") + pt(pts[k]);
        if (closed)
            d += " Z";
        return d;
    }
};

inline Viewport fit(const std::vector<Complex>& pts, double left, double top, double size)
{
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (Complex z : pts) {
        if (!finite(z))
            continue;
        x0 = std::min(x0, z.real());
        x1 = std::max(x1, z.real());
        y0 = std::min(y0, z.imag());
        y1 = std::max(y1, z.imag());
    }
    double span = std::max(x1 - x0, y1 - y0) * 1.05;
    double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    return {cx - 0.5 * span, cy + 0.5 * span, size / span, left, top};
}

inline std::string fixed(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// image of a pullback polyline, pulled inside the closed disk first
inline std::vector<Complex> image_of(const ConformalMap& map, const std::vector<Complex>& pts)
{
    std::vector<Complex> out;
    out.reserve(pts.size());
    for (Complex z : pts) {
        double r = std::abs(z);
        if (r > boundary_radius)
            z *= boundary_radius / r;
        out.push_back(map.eval_unchecked(z).w);
    }
    return out;
}

} // namespace detail

/// Two panels: the pullback disk and the image domain, each with the level-m
/// cells Q_{m,j}, the beta and delta arcs, the cuts and the shaded layer cells.
inline std::string render_svg(const ConformalMap& map, const Decomposition& d, const BoundaryLayer& layer)
{
    if (layer.empty())
        throw ConfigError("render needs a built boundary layer");
    if (layer.m() != d.m)
        throw ConfigError("layer and decomposition levels differ");
    const double panel = 480.0, pad = 20.0;
    std::vector<Complex> circle;
    for (int k = 0; k < 720; ++k)
        circle.push_back(std::polar(1.0, 2.0 * pi * k / 720));
    std::vector<Complex> outline = detail::image_of(map, circle);

    struct Panel {
        detail::Viewport v;
        bool image;
    };
    const Panel panels[2] = {{detail::fit(circle, pad, pad, panel), false},
                             {detail::fit(outline, 2.0 * pad + panel, pad, panel), true}};
    auto curve = [&](const Panel& P, const std::vector<Complex>& pts) {
        return P.image ? detail::image_of(map, pts) : pts;
    };

    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << 3.0 * pad + 2.0 * panel
      << "\" height=\"" << 2.0 * pad + panel << "\">\n"
      << "<title>level " << d.m << " decomposition, map " << map.name() << "</title>\n";
    for (int side = 0; side < 2; ++side) {
        const Panel& P = panels[side];
        s << "<g id=\"" << (P.image ? "image" : "pullback") << "\">\n";
        s << "<clipPath id=\"clip" << side << "\"><path d=\"" << P.v.path(curve(P, circle), true) << "\"/></clipPath>\n";
        s << "<g clip-path=\"url(#clip" << side << ")\">\n";
        for (const auto& c : layer.cells())
            s << "<path class=\"layer\" data-j=\"" << c.j << "\" d=\"" << P.v.path(curve(P, c.polygon), true)
              << "\" fill=\"" << (c.j % 2 ? "#f4c7a1" : "#a9cbe8") << "\" fill-opacity=\"0.6\" stroke=\"none\"/>\n";
        s << "</g>\n";
        for (int j = 0; j < d.count(); ++j) {
            const auto& cell = d.cells[static_cast<std::size_t>(j)];
            s << "<path class=\"cell\" data-j=\"" << j << "\"";
            if (!d.metrics.empty())
                s << " data-diam=\"" << detail::fixed(d.diam(j)) << "\"";
            s << " d=\"" << P.v.path(curve(P, cell.boundary_loop(16)), true)
              << "\" fill=\"none\" stroke=\"#555\" stroke-width=\"0.6\"/>\n";
        }
        for (int j = 0; j < d.count(); ++j) {
            ArcPair a = arc_pair(d.m, j, layer.config().n_max);
            std::vector<Complex> beta, delta;
            for (int k = 0; k <= 16; ++k) {
                beta.push_back(a.beta_at(k / 16.0));
                delta.push_back(a.delta_at(k / 16.0));
            }
            s << "<path class=\"beta\" d=\"" << P.v.path(curve(P, beta), false)
              << "\" fill=\"none\" stroke=\"#1a7f37\" stroke-width=\"1.6\"/>\n";
            s << "<path class=\"delta\" d=\"" << P.v.path(curve(P, delta), false)
              << "\" fill=\"none\" stroke=\"#8250df\" stroke-width=\"1.6\"/>\n";
        }
        for (const auto& g : layer.cuts())
            s << "<path class=\"cut\" data-j=\"" << g.j << "\" d=\"" << P.v.path(curve(P, g.polyline), false)
              << "\" fill=\"none\" stroke=\"#cf222e\" stroke-width=\"0.9\"/>\n";
        s << "<path class=\"outline\" d=\"" << P.v.path(curve(P, circle), true)
          << "\" fill=\"none\" stroke=\"#000\" stroke-width=\"1.2\"/>\n";
        s << "</g>\n";
    }
    s << "</svg>\n";
    return s.str();
}

inline void write_svg(const std::string& path, const ConformalMap& map, const Decomposition& d,
                      const BoundaryLayer& layer)
{
    std::string doc = render_svg(map, d, layer);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << doc;
    if (!out)
        throw IoError("write to '" + path + "' failed");
}

} // namespace sobdens
