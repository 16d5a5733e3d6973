#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "uot/color.hpp"
#include "uot/objectives.hpp"

namespace uot {

namespace {

int read_ppm_token(std::istream& in) {
  // skips whitespace and '#' comments between header tokens
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      in.unget();
      break;
    }
  }
  int value;
  if (!(in >> value)) throw std::runtime_error("load_ppm: malformed header");
  return value;
}

Eigen::Vector3d pixel_at(const Image& img, std::size_t p) {
  return {static_cast<double>(img.rgb[3 * p]), static_cast<double>(img.rgb[3 * p + 1]),
          static_cast<double>(img.rgb[3 * p + 2])};
}

}  // namespace

Image load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_ppm: cannot open " + path);
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '6')
    throw std::runtime_error("load_ppm: not a binary PPM (P6) file");
  Image img;
  img.width = read_ppm_token(in);
  img.height = read_ppm_token(in);
  int maxval = read_ppm_token(in);
  if (img.width <= 0 || img.height <= 0 || maxval != 255)
    throw std::runtime_error("load_ppm: unsupported dimensions or maxval");
  in.get();  // single whitespace after maxval
  img.rgb.resize(img.pixel_count() * 3);
  in.read(reinterpret_cast<char*>(img.rgb.data()),
          static_cast<std::streamsize>(img.rgb.size()));
  if (!in) throw std::runtime_error("load_ppm: truncated pixel data");
  return img;
}

std::string ppm_to_bytes(const Image& image) {
  std::ostringstream out;
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()),
            static_cast<std::streamsize>(image.rgb.size()));
  return out.str();
}

void save_ppm(const Image& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_ppm: cannot open " + path);
  std::string bytes = ppm_to_bytes(image);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("save_ppm: write failed");
}

Quantization quantize_image(const Image& image, Eigen::Index n, std::uint64_t seed) {
  const std::size_t pixels = image.pixel_count();
  if (pixels == 0) throw std::invalid_argument("quantize_image: empty image");
  std::set<std::array<std::uint8_t, 3>> distinct;
  for (std::size_t p = 0; p < pixels && static_cast<Eigen::Index>(distinct.size()) < n + 1; ++p)
    distinct.insert({image.rgb[3 * p], image.rgb[3 * p + 1], image.rgb[3 * p + 2]});
  if (static_cast<Eigen::Index>(distinct.size()) < n)
    throw std::invalid_argument("quantize_image: n exceeds the number of distinct colors");

  // farthest-point initialization from a seeded random pixel
  std::mt19937_64 rng(seed);
  MatrixXd centroids(n, 3);
  std::vector<double> dist(pixels, std::numeric_limits<double>::infinity());
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, pixels - 1)(rng);
  centroids.row(0) = pixel_at(image, first).transpose();
  for (Eigen::Index k = 1; k < n; ++k) {
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t p = 0; p < pixels; ++p) {
      double d = (pixel_at(image, p) - centroids.row(k - 1).transpose()).squaredNorm();
      dist[p] = std::min(dist[p], d);
      if (dist[p] > far_d) {
        far_d = dist[p];
        far = p;
      }
    }
    centroids.row(k) = pixel_at(image, far).transpose();
  }

  Quantization q;
  q.centroids = centroids;
  q.assignments.assign(pixels, 0);
  for (int round = 0; round < 100; ++round) {
    // assignment step
    for (std::size_t p = 0; p < pixels; ++p) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        double d = (pixel_at(image, p) - q.centroids.row(k).transpose()).squaredNorm();
        if (d < best) {
          best = d;
          arg = static_cast<int>(k);
        }
      }
      q.assignments[p] = arg;
    }
    // update step
    MatrixXd sums = MatrixXd::Zero(n, 3);
    std::vector<long> counts(static_cast<std::size_t>(n), 0);
    for (std::size_t p = 0; p < pixels; ++p) {
      sums.row(q.assignments[p]) += pixel_at(image, p).transpose();
      ++counts[static_cast<std::size_t>(q.assignments[p])];
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      if (counts[static_cast<std::size_t>(k)] == 0) {
        // refill with the pixel farthest from its current centroid
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t p = 0; p < pixels; ++p) {
          double d =
              (pixel_at(image, p) - q.centroids.row(q.assignments[p]).transpose()).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = p;
          }
        }
        sums.row(q.assignments[far]) -= pixel_at(image, far).transpose();
        --counts[static_cast<std::size_t>(q.assignments[far])];
        q.assignments[far] = static_cast<int>(k);
        sums.row(k) = pixel_at(image, far).transpose();
        counts[static_cast<std::size_t>(k)] = 1;
      }
    }
    double movement = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::RowVector3d next = sums.row(k) / static_cast<double>(counts[k]);
      movement = std::max(movement, (next - q.centroids.row(k)).norm());
      q.centroids.row(k) = next;
    }
    if (movement < 1e-3) break;
  }
  // final assignments consistent with the returned centroids
  for (std::size_t p = 0; p < pixels; ++p) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
      double d = (pixel_at(image, p) - q.centroids.row(k).transpose()).squaredNorm();
      if (d < best) {
        best = d;
        q.assignments[p] = static_cast<int>(k);
      }
    }
  }
  return q;
}

CostMatrix color_cost_matrix(const MatrixXd& source_centroids, const MatrixXd& target_centroids) {
  if (source_centroids.rows() != target_centroids.rows() || source_centroids.cols() != 3 ||
      target_centroids.cols() != 3)
    throw std::invalid_argument("color_cost_matrix: centroid shape mismatch");
  const Eigen::Index n = source_centroids.rows();
  MatrixXd C(n, n);
  const double scale = 1.0 / (3.0 * 255.0 * 255.0);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l)
      C(k, l) = (source_centroids.row(k) - target_centroids.row(l)).squaredNorm() * scale;
  return CostMatrix(std::move(C));
}

ColorHistogramPair build_histogram_pair(const Image& source, const Image& target,
                                        Eigen::Index n, std::uint64_t seed) {
  ColorHistogramPair pair{quantize_image(source, n, seed), quantize_image(target, n, seed),
                          VectorXd::Zero(n), VectorXd::Zero(n)};
  for (int k : pair.source.assignments) pair.a[k] += 1.0;
  for (int k : pair.target.assignments) pair.b[k] += 1.0;
  pair.a /= static_cast<double>(source.pixel_count());
  pair.b /= static_cast<double>(target.pixel_count());
  return pair;
}

ColorTransferResult color_transfer(const Image& source, const Image& target, Eigen::Index n,
                                   ColorSolver solver, double tau, double epsilon,
                                   double sinkhorn_eta, std::uint64_t seed) {
  ColorHistogramPair pair = build_histogram_pair(source, target, n, seed);
  CostMatrix cost = color_cost_matrix(pair.source.centroids, pair.target.centroids);
  if (tau <= 0.0) tau = 10.0 * std::max(cost.max_abs(), 1e-6);
  UotProblem problem(cost, Measure(pair.a), Measure(pair.b), tau);

  TransportPlan plan(MatrixXd::Zero(n, n));
  SolveReport report;
  if (solver == ColorSolver::gem_uot_solver) {
    GemConfig config;
    config.epsilon = epsilon;
    std::tie(plan, report) = gem_uot(problem, config);
  } else {
    std::tie(plan, report) = sinkhorn_uot(problem, sinkhorn_eta, epsilon, 100000);
  }

  // barycentric recoloring of each source centroid through its plan row
  MatrixXd palette(n, 3);
  for (Eigen::Index k = 0; k < n; ++k) {
    double row_sum = plan.entries().row(k).sum();
    if (row_sum > 0.0) {
      palette.row(k) = (plan.entries().row(k) * pair.target.centroids) / row_sum;
    } else {
      palette.row(k) = pair.source.centroids.row(k);
    }
  }

  ColorTransferResult out{source, sparsity_ratio(plan, 1e-10), std::move(report)};
  for (std::size_t p = 0; p < source.pixel_count(); ++p) {
    Eigen::RowVector3d c = palette.row(pair.source.assignments[p]);
    for (int ch = 0; ch < 3; ++ch)
      out.output.rgb[3 * p + ch] =
          static_cast<std::uint8_t>(std::lround(std::clamp(c[ch], 0.0, 255.0)));
  }
  return out;
}

}  // namespace uot
