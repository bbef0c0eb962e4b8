#pragma once

#include "homotopy_ledger/canonical_group.hpp"
#include "homotopy_ledger/derivation.hpp"
#include "homotopy_ledger/errors.hpp"
#include "homotopy_ledger/explicit_group.hpp"
#include "homotopy_ledger/extension.hpp"
#include "homotopy_ledger/int_matrix.hpp"
#include "homotopy_ledger/locality.hpp"
#include "homotopy_ledger/presented_group.hpp"
#include "homotopy_ledger/smith.hpp"
#include "homotopy_ledger/tables.hpp"
