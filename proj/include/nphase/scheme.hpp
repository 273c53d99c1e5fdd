#pragma once

namespace nphase {

enum class Scheme { SemiImplicit, FullyImplicit, ModifiedCN };

}  // namespace nphase
