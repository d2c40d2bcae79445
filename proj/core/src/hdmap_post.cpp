#include "scenforge/hdmap_post.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace scenforge::post {

namespace {

// Fixed 8-neighbor order used everywhere: N, NE, E, SE, S, SW, W, NW.
constexpr int kDr[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDc[8] = {0, 1, 1, 1, 0, -1, -1, -1};

int neighbor_count(const BinaryMask& m, int r, int c) {
  int n = 0;
  for (int k = 0; k < 8; ++k) n += m.get(r + kDr[k], c + kDc[k]);
  return n;
}

// 8-connected component labels; -1 is background.
std::vector<int> label_components(const BinaryMask& m, int& count) {
  std::vector<int> label(static_cast<std::size_t>(m.width) * m.height, -1);
  count = 0;
  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      if (!m.at(r, c) || label[static_cast<std::size_t>(r) * m.width + c] >= 0) continue;
      const int id = count++;
      stack.push_back({r, c});
      label[static_cast<std::size_t>(r) * m.width + c] = id;
      while (!stack.empty()) {
        auto [cr, cc] = stack.back();
        stack.pop_back();
        for (int k = 0; k < 8; ++k) {
          const int nr = cr + kDr[k], nc = cc + kDc[k];
          if (nr < 0 || nr >= m.height || nc < 0 || nc >= m.width) continue;
          auto& l = label[static_cast<std::size_t>(nr) * m.width + nc];
          if (m.at(nr, nc) && l < 0) {
            l = id;
            stack.push_back({nr, nc});
          }
        }
      }
    }
  }
  return label;
}

}  // namespace

std::size_t BinaryMask::count() const {
  std::size_t n = 0;
  for (std::uint8_t v : data) n += v;
  return n;
}

std::array<BinaryMask, 3> binarize(const bev::BevRaster& raster, std::uint8_t threshold) {
  std::array<BinaryMask, 3> out;
  for (int ch = 0; ch < 3; ++ch) {
    out[ch] = BinaryMask::blank(raster.width, raster.height);
    for (int r = 0; r < raster.height; ++r)
      for (int c = 0; c < raster.width; ++c)
        out[ch].at(r, c) = raster.at(ch, r, c) >= threshold ? 1 : 0;
  }
  return out;
}

BinaryMask skeletonize(const BinaryMask& mask) {
  BinaryMask img = mask;
  const int h = img.height, w = img.width;
  std::vector<Pixel> kill;

  auto pass = [&](int sub) {
    kill.clear();
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (!img.at(r, c)) continue;
        const int p2 = img.get(r - 1, c), p3 = img.get(r - 1, c + 1), p4 = img.get(r, c + 1),
                  p5 = img.get(r + 1, c + 1), p6 = img.get(r + 1, c), p7 = img.get(r + 1, c - 1),
                  p8 = img.get(r, c - 1), p9 = img.get(r - 1, c - 1);
        const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
        if (b < 2 || b > 6) continue;
        const int seq[9] = {p2, p3, p4, p5, p6, p7, p8, p9, p2};
        int a = 0;
        for (int k = 0; k < 8; ++k)
          if (seq[k] == 0 && seq[k + 1] == 1) ++a;
        if (a != 1) continue;
        if (sub == 0) {
          if (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0) continue;
        } else {
          if (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0) continue;
        }
        kill.push_back({r, c});
      }
    }
    for (const Pixel& p : kill) img.at(p.row, p.col) = 0;
    return !kill.empty();
  };

  for (;;) {
    const bool a = pass(0);
    const bool b = pass(1);
    if (!a && !b) break;
  }

  // Restore one representative pixel for every input component that was
  // erased completely (isolated 2x2 blocks die in the thinning passes).
  int n_comp = 0;
  const std::vector<int> label = label_components(mask, n_comp);
  if (n_comp > 0) {
    std::vector<Pixel> representative(static_cast<std::size_t>(n_comp), {-1, -1});
    std::vector<char> survived(static_cast<std::size_t>(n_comp), 0);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const int id = label[static_cast<std::size_t>(r) * w + c];
        if (id < 0) continue;
        if (representative[id].row < 0) representative[id] = {r, c};  // topmost-leftmost
        if (img.at(r, c)) survived[id] = 1;
      }
    }
    for (int id = 0; id < n_comp; ++id)
      if (!survived[id]) img.at(representative[id].row, representative[id].col) = 1;
  }
  return img;
}

std::vector<PixelPolyline> trace_polylines(const BinaryMask& skeleton) {
  const int h = skeleton.height, w = skeleton.width;
  std::vector<int> degree(static_cast<std::size_t>(w) * h, 0);
  auto deg = [&](int r, int c) -> int& { return degree[static_cast<std::size_t>(r) * w + c]; };
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (skeleton.at(r, c)) deg(r, c) = neighbor_count(skeleton, r, c);

  auto is_junction = [&](int r, int c) { return deg(r, c) >= 3; };
  std::vector<char> visited(static_cast<std::size_t>(w) * h, 0);
  auto seen = [&](Pixel p) -> char& {
    return visited[static_cast<std::size_t>(p.row) * w + p.col];
  };
  // Junction pixels can belong to several polylines; track that they were
  // covered by at least one so leftovers can be swept at the end.
  std::vector<char> covered(static_cast<std::size_t>(w) * h, 0);
  auto cover = [&](Pixel p) { covered[static_cast<std::size_t>(p.row) * w + p.col] = 1; };

  std::vector<PixelPolyline> out;

  auto walk = [&](Pixel from, Pixel via) {
    PixelPolyline path{from};
    cover(from);
    if (!is_junction(from.row, from.col)) seen(from) = 1;
    Pixel prev = from, cur = via;
    for (;;) {
      path.push_back(cur);
      cover(cur);
      if (is_junction(cur.row, cur.col)) break;
      seen(cur) = 1;
      Pixel nxt{-1, -1};
      for (int k = 0; k < 8; ++k) {
        const int nr = cur.row + kDr[k], nc = cur.col + kDc[k];
        if (!skeleton.get(nr, nc)) continue;
        if (nr == prev.row && nc == prev.col) continue;
        nxt = {nr, nc};
        break;
      }
      if (nxt.row < 0) break;  // endpoint
      if (seen(nxt) && !is_junction(nxt.row, nxt.col)) {
        if (nxt == path.front()) {
          path.push_back(nxt);  // closed loop: repeat the first pixel
          cover(nxt);
        }
        break;
      }
      prev = cur;
      cur = nxt;
    }
    out.push_back(std::move(path));
  };

  // open chains from endpoints
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!skeleton.at(r, c) || deg(r, c) != 1 || seen({r, c})) continue;
      for (int k = 0; k < 8; ++k) {
        const int nr = r + kDr[k], nc = c + kDc[k];
        if (skeleton.get(nr, nc)) {
          walk({r, c}, {nr, nc});
          break;
        }
      }
    }
  }
  // spurs leaving junctions
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!skeleton.at(r, c) || !is_junction(r, c)) continue;
      for (int k = 0; k < 8; ++k) {
        const int nr = r + kDr[k], nc = c + kDc[k];
        if (!skeleton.get(nr, nc)) continue;
        if (is_junction(nr, nc) || seen({nr, nc})) continue;
        walk({r, c}, {nr, nc});
      }
    }
  }
  // remaining pure loops
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!skeleton.at(r, c) || deg(r, c) != 2 || seen({r, c})) continue;
      for (int k = 0; k < 8; ++k) {
        const int nr = r + kDr[k], nc = c + kDc[k];
        if (skeleton.get(nr, nc)) {
          walk({r, c}, {nr, nc});
          break;
        }
      }
    }
  }
  // anything never covered (isolated pixels; junctions whose every neighbor
  // is another junction) becomes a 1-point polyline
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (skeleton.at(r, c) && !covered[static_cast<std::size_t>(r) * w + c])
        out.push_back({{r, c}});

  std::stable_sort(out.begin(), out.end(), [](const PixelPolyline& a, const PixelPolyline& b) {
    if (a.front().row != b.front().row) return a.front().row < b.front().row;
    return a.front().col < b.front().col;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Camera rig
// ---------------------------------------------------------------------------

CameraRig default_rig() {
  struct ViewDef {
    const char* name;
    double azimuth_deg;
  };
  // Camera x right, y down, z forward; azimuth rotates the optical axis from
  // +x (vehicle forward) toward +y (vehicle left).
  constexpr ViewDef defs[6] = {{"FL", 60.0}, {"F", 0.0},   {"FR", -60.0},
                               {"BR", -120.0}, {"B", 180.0}, {"BL", 120.0}};
  constexpr double kHeight = 1.6;
  CameraRig rig;
  for (const auto& d : defs) {
    CameraView v;
    v.name = d.name;
    const double phi = deg_to_rad(d.azimuth_deg);
    const double s = std::sin(phi), c = std::cos(phi);
    v.rotation.m = {s, -c, 0.0,   // camera x (right)
                    0.0, 0.0, -1.0,  // camera y (down)
                    c, s, 0.0};   // camera z (optical axis)
    const Vec3 center{0.0, 0.0, kHeight};
    const Vec3 rc = mul(v.rotation, center);
    v.translation = {-rc.x, -rc.y, -rc.z};
    rig.views.push_back(std::move(v));
  }
  return rig;
}

std::string rig_to_json(const CameraRig& rig) {
  nlohmann::ordered_json j;
  j["schema"] = "scenforge.rig/1";
  auto& views = j["views"] = nlohmann::ordered_json::array();
  for (const auto& v : rig.views) {
    nlohmann::ordered_json jv;
    jv["name"] = v.name;
    jv["width"] = v.width;
    jv["height"] = v.height;
    jv["fx"] = v.fx;
    jv["fy"] = v.fy;
    jv["cx"] = v.cx;
    jv["cy"] = v.cy;
    jv["rotation"] = v.rotation.m;
    jv["translation"] = {v.translation.x, v.translation.y, v.translation.z};
    views.push_back(std::move(jv));
  }
  return j.dump(2) + "\n";
}

CameraRig rig_from_json(const std::string& text) {
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("schema") || j["schema"] != "scenforge.rig/1")
      throw std::runtime_error("rig_from_json: unknown schema");
    CameraRig rig;
    for (const auto& jv : j.at("views")) {
      CameraView v;
      v.name = jv.at("name").get<std::string>();
      v.width = jv.at("width").get<int>();
      v.height = jv.at("height").get<int>();
      v.fx = jv.at("fx").get<double>();
      v.fy = jv.at("fy").get<double>();
      v.cx = jv.at("cx").get<double>();
      v.cy = jv.at("cy").get<double>();
      const auto rot = jv.at("rotation").get<std::vector<double>>();
      if (rot.size() != 9) throw std::runtime_error("rig_from_json: rotation must have 9 entries");
      std::copy(rot.begin(), rot.end(), v.rotation.m.begin());
      const auto tr = jv.at("translation").get<std::vector<double>>();
      if (tr.size() != 3)
        throw std::runtime_error("rig_from_json: translation must have 3 entries");
      v.translation = {tr[0], tr[1], tr[2]};
      rig.views.push_back(std::move(v));
    }
    return rig;
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("rig_from_json: ") + ex.what());
  }
}

void validate_rig(const CameraRig& rig) {
  if (rig.views.size() != kViewOrder.size())
    throw std::invalid_argument("rig must have exactly " + std::to_string(kViewOrder.size()) +
                                " views, got " + std::to_string(rig.views.size()));
  for (std::size_t i = 0; i < rig.views.size(); ++i) {
    const CameraView& v = rig.views[i];
    if (v.name != kViewOrder[i])
      throw std::invalid_argument("view " + std::to_string(i) + " must be named '" +
                                  kViewOrder[i] + "', got '" + v.name + "'");
    if (v.width <= 0 || v.height <= 0 || v.fx <= 0.0 || v.fy <= 0.0)
      throw std::invalid_argument("view '" + v.name + "' has non-positive dimensions or focal");
    const Mat3 gram = mul(transpose(v.rotation), v.rotation);
    const Mat3 eye = Mat3::identity();
    for (int k = 0; k < 9; ++k)
      if (std::abs(gram.m[k] - eye.m[k]) > 1e-9)
        throw std::invalid_argument("view '" + v.name + "' rotation is not orthonormal");
    const auto& m = v.rotation.m;
    const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                       m[2] * (m[3] * m[7] - m[4] * m[6]);
    if (std::abs(det - 1.0) > 1e-9)
      throw std::invalid_argument("view '" + v.name + "' rotation is not proper (det != 1)");
  }
}

CamPoint project_point(Vec3 world, const CameraView& view) {
  const Vec3 pc = mul(view.rotation, world) + view.translation;
  CamPoint out;
  out.z = pc.z;
  out.u = view.fx * pc.x / pc.z + view.cx;
  out.v = view.fy * pc.y / pc.z + view.cy;
  return out;
}

ProjectedPolyline project_to_view(const std::vector<Vec3>& world, const CameraView& view,
                                  double near) {
  ProjectedPolyline out;
  out.view = view.name;
  if (world.empty()) return out;

  std::vector<Vec3> cam(world.size());
  for (std::size_t i = 0; i < world.size(); ++i)
    cam[i] = mul(view.rotation, world[i]) + view.translation;

  // Clip at a depth strictly greater than the near plane so every retained
  // point satisfies z > near exactly.
  const double z_clip = near * (1.0 + 1e-9);
  auto clip_at = [&](const Vec3& behind, const Vec3& front) {
    const double t = (z_clip - behind.z) / (front.z - behind.z);
    return behind + t * (front - behind);
  };
  auto emit = [&](const Vec3& pc, bool chain_start) {
    ProjectedPoint p;
    p.u = view.fx * pc.x / pc.z + view.cx;
    p.v = view.fy * pc.y / pc.z + view.cy;
    p.visible = p.u >= 0.0 && p.u <= view.width - 1.0 && p.v >= 0.0 && p.v <= view.height - 1.0;
    p.chain_start = chain_start;
    out.points.push_back(p);
  };

  bool gap = true;
  for (std::size_t i = 0; i < cam.size(); ++i) {
    if (cam[i].z > near) {
      if (i > 0 && cam[i - 1].z <= near) {
        emit(clip_at(cam[i - 1], cam[i]), true);
        gap = false;
      }
      emit(cam[i], gap);
      gap = false;
    } else {
      if (i > 0 && cam[i - 1].z > near) emit(clip_at(cam[i], cam[i - 1]), false);
      gap = true;
    }
  }
  return out;
}

std::vector<Vec3> lift_ground(const std::vector<Vec2>& pts) {
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back({p.x, p.y, 0.0});
  return out;
}

std::vector<Vec2> densify(const std::vector<Vec2>& pts, double max_step) {
  if (pts.size() < 2 || max_step <= 0.0) return pts;
  std::vector<Vec2> out;
  out.push_back(pts.front());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i], b = pts[i + 1];
    const double len = distance(a, b);
    const int subdivisions = std::max(1, static_cast<int>(std::ceil(len / max_step)));
    for (int k = 1; k <= subdivisions; ++k)
      out.push_back(a + (static_cast<double>(k) / subdivisions) * (b - a));
  }
  return out;
}

}  // namespace scenforge::post
