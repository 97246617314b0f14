// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "flexpaint/config.hpp"
#include "flexpaint/core.hpp"
#include "flexpaint/embed.hpp"
#include "flexpaint/flowsync.hpp"
#include "flexpaint/fusion.hpp"
#include "flexpaint/grid.hpp"
#include "flexpaint/io.hpp"
#include "flexpaint/mesh.hpp"
#include "flexpaint/obj_io.hpp"
#include "flexpaint/pipeline.hpp"
#include "flexpaint/primitives.hpp"
#include "flexpaint/raster.hpp"
#include "flexpaint/reproject.hpp"
#include "flexpaint/texture.hpp"
#include "flexpaint/uvtools.hpp"
#include "flexpaint/velocity.hpp"
