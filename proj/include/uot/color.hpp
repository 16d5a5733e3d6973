#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uot/solvers.hpp"
#include "uot/types.hpp"

namespace uot {

/// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

/// Binary PPM (P6, maxval 255) readers and writers.
Image load_ppm(const std::string& path);
std::string ppm_to_bytes(const Image& image);
void save_ppm(const Image& image, const std::string& path);

struct Quantization {
  MatrixXd centroids;           // n x 3, RGB in [0, 255]
  std::vector<int> assignments; // per pixel, centroid index
};

/// k-means over pixel colors: seeded farthest-point initialization, Lloyd
/// iterations until centroid movement < 1e-3 or 100 rounds. Errors when n
/// exceeds the number of distinct colors. Empty clusters are refilled with
/// the point farthest from its centroid, so every cluster keeps mass.
Quantization quantize_image(const Image& image, Eigen::Index n, std::uint64_t seed);

/// Squared RGB Euclidean distance between centroid pairs scaled by
/// 1/(3*255^2) into [0, 1].
CostMatrix color_cost_matrix(const MatrixXd& source_centroids, const MatrixXd& target_centroids);

/// Quantized palettes of both images plus the pixel histograms on the simplex.
struct ColorHistogramPair {
  Quantization source;
  Quantization target;
  VectorXd a;  // source histogram, sums to 1
  VectorXd b;  // target histogram, sums to 1
};

ColorHistogramPair build_histogram_pair(const Image& source, const Image& target,
                                        Eigen::Index n, std::uint64_t seed);

enum class ColorSolver { gem_uot_solver, sinkhorn_solver };

struct ColorTransferResult {
  Image output;
  double plan_sparsity;  // fraction of plan entries <= 1e-10
  SolveReport report;
};

/// Transfers the target palette onto the source image: quantize both images,
/// solve the penalized transport between the histograms, then recolor each
/// source pixel by the barycentric image of its centroid's plan row (rows
/// with zero mass keep the original centroid).
ColorTransferResult color_transfer(const Image& source, const Image& target, Eigen::Index n,
                                   ColorSolver solver, double tau = 0.0, double epsilon = 1e-3,
                                   double sinkhorn_eta = 0.01, std::uint64_t seed = 1);

}  // namespace uot
