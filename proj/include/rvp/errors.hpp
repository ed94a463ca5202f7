#pragma once

#include <stdexcept>
#include <string>

namespace rvp {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A state left the region where a model or sensor is defined.
class InvalidState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The lookahead circle does not meet the diagram ahead of the vehicle.
class NoWaypoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Waypoint at or behind the rear axle; pure pursuit is undefined there.
class WaypointBehindAxle : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Flow evaluated outside |y| <= lookahead.
class FlowDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rvp
