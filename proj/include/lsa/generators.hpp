#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsa/geometry.hpp"
#include "lsa/model_classes.hpp"
#include "lsa/shapes.hpp"

namespace lsa {

/// A closed set that can be sampled on any window at any resolution above
/// its floor, with an exact distance oracle.
class SetSampler {
 public:
  virtual ~SetSampler() = default;

  virtual int dim() const = 0;
  virtual std::string name() const = 0;
  /// dist(q, set).
  virtual double distance(const PointRef& q) const = 0;
  /// Smallest h the sampler can honour (0 when unlimited).
  virtual double resolution_floor() const { return 0.0; }
  /// True when window() ignores h and returns a fixed finite sample.
  virtual bool fixed_resolution() const { return false; }

  /// h-net of set ∩ ball. Throws NumericFailure when h is below the floor.
  PointCloud window(const Ball& ball, double h) const;

  /// Members of c known to pass through the set near x (absolute units,
  /// rooted at 0 so that x + S is the candidate). Used as optimizer seeds.
  virtual std::vector<ModelMember> witnesses(const ModelClassId& c, const PointRef& x,
                                             double r) const;

  const nlohmann::json& spec() const { return spec_; }
  void set_spec(nlohmann::json spec) { spec_ = std::move(spec); }

 protected:
  virtual PointCloud sample_window(const Ball& ball, double h) const = 0;

 private:
  nlohmann::json spec_;
};

using SamplerPtr = std::shared_ptr<const SetSampler>;

/// Sampler over an analytic shape.
SamplerPtr shape_sampler(std::string name, ShapePtr shape, double floor = 0.0);
/// Sampler over a finite cloud: windows are restrictions, h is the cloud's.
SamplerPtr cloud_sampler(PointCloud cloud, std::string name = "cloud");

/// Builds a sampler from {"spec": name, "params": {...}, "seed": int}.
/// Names: flat, line, plane, segment, box, cross_2d, axes_union_2d, graph,
/// koch, circle, sphere, light_cone, y_cone, t_cone, y_spine, t_spine,
/// harmonic_zero, sphere_stack, sphere_stack_plus, annulus_mixer,
/// reifenberg_graph.
SamplerPtr make_sampler(const nlohmann::json& spec);

/// Vertices of the level-k snowflake polyline from (0,0) to (1,0) with bump
/// angle theta (radians); each level scales segments by 1/(2(1+cos theta)).
std::vector<double> koch_vertices(double theta, int level);
double koch_dimension(double theta);

/// Extra points r_i e, r_i = 2^-i - 3^-i for i >= 1.
double sphere_stack_extra_radius(int i);

}  // namespace lsa
