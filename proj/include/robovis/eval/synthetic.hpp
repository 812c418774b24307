#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "robovis/eval/annotations.hpp"
#include "robovis/imaging/filters.hpp"
#include "robovis/imaging/image.hpp"
#include "robovis/random.hpp"

namespace robovis::eval {

struct ObjectImage {
  std::string class_name;
  Image image;
};

/// Dense multi-scale shape texture used as scene background.
Image clutter_background(int w, int h, std::uint64_t seed);
/// Planar object covered in high-contrast shapes (many stable keypoints).
Image textured_object(int w, int h, std::uint64_t seed);
/// Flat body with a handful of dark marks; the marks differ per seed.
Image textureless_object(int w, int h, std::uint64_t seed);

struct SceneSpec {
  int width = 640, height = 480;
  int min_instances = 1, max_instances = 1;
  double min_scale = 0.7, max_scale = 1.2;
  double max_rotation = 0.5;  ///< radians, symmetric
  double max_shear = 0.0;
  double blur_probability = 0.0;
  double illumination_probability = 0.0;
  double occlusion_probability = 0.0;
  int max_pose_attempts = 200;

  void validate() const;
};

struct Placement {
  std::size_t model = 0;
  AffineMatrix pose{1, 0, 0, 0, 1, 0};  ///< model pixel coordinates to scene coordinates
  ConditionFlags flags = kNormal;
  std::uint64_t seed = 0;  ///< drives the occluder layout
};

struct Scene {
  std::string frame;
  Image image;
  std::vector<AnnotationRecord> truth;
};

/// Integer box covering the warped model rectangle [0,w] x [0,h].
BoundingBox placement_box(const AffineMatrix& pose, int w, int h);

/// Composites the placements in order. Blur and illumination alter the
/// instance's pixels; occlusion covers one side of the box with background.
Scene render_scene(std::span<const ObjectImage> models, const Image& background, std::span<const Placement> placements,
                   const std::string& frame);

/// Seeded poses fully inside the frame and not overlapping earlier instances.
/// Poses that fail either test are resampled up to max_pose_attempts times.
Scene generate_synthetic_scene(std::span<const ObjectImage> models, std::span<const Image> backgrounds,
                               const SceneSpec& spec, std::uint64_t seed, const std::string& frame);

// Bright-blob window task.

/// Grey background with bars, squares, rings and specks, but no blob-shaped disc.
Image blob_free_clutter(int w, int h, std::uint64_t seed);
/// A side x side crop of blob-free clutter with a bright soft disc centred in it.
Image blob_window(int side, std::uint64_t seed);
/// Blob-free clutter with `count` non-overlapping blobs; truth boxes are the
/// window squares the blobs were drawn for (side between min_side and max_side).
Scene blob_scene(int w, int h, int count, int min_side, int max_side, std::uint64_t seed, const std::string& frame);

}  // namespace robovis::eval
