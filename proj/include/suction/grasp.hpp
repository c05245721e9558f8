#pragma once

#include "suction/transform.hpp"

namespace suction {

/// Target point on the surface and the unit approach direction, which points
/// from the gripper into the object (the inward surface normal for sampled grasps).
struct SuctionGrasp {
    Vec3 point = Vec3::Zero();
    Vec3 approach = Vec3(0.0, 0.0, -1.0);

    SuctionGrasp transformed(const RigidTransform& t) const
    {
        return {t.apply(point), t.apply_direction(approach)};
    }
};

}  // namespace suction
