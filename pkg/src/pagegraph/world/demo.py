"""The canonical 8-page shopping demo world used across tests and fixtures."""

from __future__ import annotations

from pagegraph.world.spec import Page, TaskSpec, Widget, WorldSpec


def demo_world() -> WorldSpec:
    """Launcher, search, results, detail, cart, checkout, confirmation, settings."""
    pages = (
        Page(
            name="launcher",
            title="Home",
            summary="Home screen with an app grid: search, shopping cart, and device settings.",
            widgets=(
                Widget("search_app", "Search app", "button", 0.2, 0.3, target="search"),
                Widget("cart_app", "Cart app", "button", 0.5, 0.3, target="cart"),
                Widget("settings_app", "Settings app", "button", 0.8, 0.3, target="settings"),
            ),
        ),
        Page(
            name="search",
            title="Search",
            summary="Product search page with a query field and a search button.",
            widgets=(
                Widget("search_field", "Search", "field", 0.5, 0.2,
                       field_name="query", text="headphones"),
                Widget("search_button", "Search now", "button", 0.5, 0.4,
                       target="results", precondition=(("query", "headphones"),)),
                Widget("search_home", "Home shortcut", "button", 0.1, 0.9, target="launcher"),
            ),
        ),
        Page(
            name="results",
            title="Results",
            summary="Search results page listing matching products.",
            widgets=(
                Widget("first_result", "First result", "list-item", 0.5, 0.3, target="detail"),
                Widget("results_back", "Back to search", "button", 0.1, 0.9, target="search"),
            ),
        ),
        Page(
            name="detail",
            title="Product detail",
            summary="Product detail page with price, description, and purchase controls.",
            widgets=(
                Widget("add_to_cart", "Add to cart", "button", 0.3, 0.7,
                       effect=(("cart", "1"),)),
                Widget("open_cart", "Go to cart", "button", 0.7, 0.7, target="cart"),
                Widget("detail_back", "Back to results", "button", 0.1, 0.9, target="results"),
            ),
        ),
        Page(
            name="cart",
            title="Cart",
            summary="Shopping cart page listing items ready for checkout.",
            widgets=(
                Widget("checkout_button", "Checkout", "button", 0.5, 0.6, target="checkout"),
                Widget("keep_shopping", "Keep shopping", "button", 0.1, 0.9, target="launcher"),
            ),
        ),
        Page(
            name="checkout",
            title="Checkout",
            summary="Checkout page with the payment form and order placement button.",
            widgets=(
                Widget("place_order", "Place order", "button", 0.5, 0.6,
                       target="confirmation", effect=(("order", "1"),)),
                Widget("edit_cart", "Edit cart", "button", 0.1, 0.9, target="cart"),
            ),
        ),
        Page(
            name="confirmation",
            title="Confirmation",
            summary="Order confirmation page acknowledging the placed order.",
            widgets=(
                Widget("home_button", "Back home", "button", 0.5, 0.7, target="launcher"),
            ),
        ),
        Page(
            name="settings",
            title="Settings",
            summary="Device settings page with network and connectivity toggles.",
            widgets=(
                Widget("wifi_toggle", "Wifi toggle", "button", 0.5, 0.3,
                       effect=(("wifi", "on"),)),
                Widget("settings_back", "Exit settings", "button", 0.1, 0.9, target="launcher"),
            ),
        ),
    )
    tasks = (
        TaskSpec("open the search page", goal_page="search"),
        TaskSpec("search for headphones", goal_page="results",
                 goal_state=(("query", "headphones"),)),
        TaskSpec("open the first search result", goal_page="detail"),
        TaskSpec("add the first result to the cart", goal_page="detail",
                 goal_state=(("cart", "1"),)),
        TaskSpec("open the shopping cart", goal_page="cart"),
        TaskSpec("place an order for the first result", goal_page="confirmation",
                 goal_state=(("cart", "1"), ("order", "1"))),
        TaskSpec("open device settings", goal_page="settings"),
        TaskSpec("turn on wifi", goal_page="settings", goal_state=(("wifi", "on"),)),
        TaskSpec("return home after placing an order", goal_page="launcher",
                 goal_state=(("order", "1"),)),
        TaskSpec("review the cart after adding the first result", goal_page="cart",
                 goal_state=(("cart", "1"),)),
    )
    return WorldSpec(scenario="demo", start_page="launcher", pages=pages, tasks=tasks)
