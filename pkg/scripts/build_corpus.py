"""Regenerate the bundled benchmark corpus and the test-only fixture apps.

Run from the repository root:  python3 scripts/build_corpus.py
"""

from __future__ import annotations

import json
from itertools import count
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "src" / "reqnav" / "corpus"
FIXTURES = ROOT / "tests" / "fixtures"

_y = count()


def el(cls, rid=None, text=None, desc=None, click=False, scroll=False, checked=None, window=None, kids=()):
    y = next(_y) % 20 * 96
    attrs = {"class": f"android.widget.{cls}", "bounds": f"[0,{y}][1080,{y + 96}]"}
    if rid:
        attrs["resource-id"] = rid
    if text is not None:
        attrs["text"] = text
    if desc is not None:
        attrs["content-desc"] = desc
    if click:
        attrs["clickable"] = "true"
    if scroll:
        attrs["scrollable"] = "true"
    if checked is not None:
        attrs["checked"] = "true" if checked else "false"
    if window is not None:
        attrs["window"] = str(window)
    attrs["enabled"] = "true"
    return {"attrs": attrs, "children": list(kids)}


def screen(*kids):
    return {"attrs": {"class": "android.widget.FrameLayout", "bounds": "[0,0][1080,2340]"},
            "children": [el("LinearLayout", kids=kids)]}


def title(text):
    return el("TextView", "title", text)


def button(rid, text=None, desc=None, cls="Button"):
    return el(cls, rid, text, desc, click=True)


def label(rid, text):
    return el("TextView", rid, text)


def switch(rid, text, on=False):
    return el("Switch", rid, text, click=True, checked=on)


def group(rid, *kids, cls="LinearLayout", **kw):
    return el(cls, rid, kids=kids, **kw)


def R(rid, index=None):
    return {"resource-id": rid} if index is None else {"resource-id": rid, "index": index}


def T(text):
    return {"text": text}


def D(desc):
    return {"content-desc": desc}


def tr(tid, src, sel, dst, effects=(), action="click"):
    if action == "input-text":
        action = {"kind": "input-text", "payload": ""}
    return {"id": tid, "from": src, "selector": sel, "action": action, "to": dst, "effects": list(effects)}


def set_(sel, **attrs):
    return {"op": "set", "selector": sel, "attrs": {k.replace("_", "-"): v for k, v in attrs.items()}}


def remove(sel):
    return {"op": "remove", "selector": sel}


def append(sel, node):
    return {"op": "append", "selector": sel, "node": node}


def app(app_id, initial, states, transitions, description=""):
    for t in transitions:
        if not t["effects"]:
            del t["effects"]
    return {"app_id": app_id, "initial": initial, "states": states, "transitions": transitions,
            "variant": "correct", "description": description}


# --------------------------------------------------------------------------
# bundled apps


def browser():
    states = {
        "home": screen(
            el("EditText", "url_bar", "", "Search or type web address"),
            button("tabs_btn", "Tabs"),
            button("menu_btn", "Menu"),
            label("page_content", "Welcome page"),
        ),
        "menu": screen(
            title("Menu"),
            group("menu_list",
                  button("new_tab", "New tab"),
                  button("menu_history", "History"),
                  button("menu_downloads", "Downloads"),
                  button("menu_bookmarks", "Bookmarks"),
                  button("menu_settings", "Settings")),
        ),
        "settings": screen(
            title("Settings"),
            group("settings_list",
                  button("pref_search", "Search engine"),
                  button("pref_privacy", "Privacy"),
                  button("pref_appearance", "Appearance"),
                  button("pref_language", "Language"),
                  label("language_summary", "English"),
                  button("pref_about", "About")),
        ),
        "appearance": screen(
            title("Appearance"),
            group("appearance_list",
                  switch("dark_theme_switch", "Dark theme"),
                  button("pref_font", "Font size")),
        ),
        "language": screen(
            title("Language"),
            group("language_list",
                  *[button("language_row", n) for n in
                    ("English", "Français", "Deutsch", "Español", "Italiano", "Português", "Bengali", "日本語")],
                  cls="RecyclerView", scroll=True, window=4),
        ),
        "privacy": screen(
            title("Privacy"),
            group("privacy_list", switch("dnt_switch", "Do not track"), button("clear_cookies", "Clear cookies")),
        ),
        "history": screen(
            title("History"),
            group("history_list",
                  button("history_row", "example.com"),
                  button("history_row", "news.site.org"),
                  button("history_row", "docs.python.org")),
            button("clear_history", "Clear history"),
        ),
        "downloads": screen(
            title("Downloads"),
            group("downloads_list", button("download_row", "report.pdf"), button("download_row", "photo.jpg")),
            label("download_count", "2 files"),
        ),
        "bookmarks": screen(
            title("Bookmarks"),
            group("bookmark_list", button("bookmark_row", "Python docs"), button("bookmark_row", "Weather")),
        ),
    }
    transitions = [
        tr("home->menu", "home", R("menu_btn"), "menu"),
        tr("menu->home:new-tab", "menu", R("new_tab"), "home"),
        tr("menu->history", "menu", R("menu_history"), "history"),
        tr("menu->downloads", "menu", R("menu_downloads"), "downloads"),
        tr("menu->bookmarks", "menu", R("menu_bookmarks"), "bookmarks"),
        tr("menu->settings", "menu", R("menu_settings"), "settings"),
        tr("settings->privacy", "settings", R("pref_privacy"), "privacy"),
        tr("settings->appearance", "settings", R("pref_appearance"), "appearance"),
        tr("settings->language", "settings", R("pref_language"), "language"),
        tr("appearance:dark", "appearance", R("dark_theme_switch"), "appearance",
           [set_(R("dark_theme_switch"), checked="true")]),
        tr("language->settings:bengali", "language", T("Bengali"), "settings",
           [set_(R("title"), text="সেটিংস"), set_(R("language_summary"), text="Bengali")]),
        tr("language->settings:english", "language", T("English"), "settings",
           [set_(R("language_summary"), text="English")]),
        tr("history:clear", "history", R("clear_history"), "history", [remove(R("history_row"))]),
        tr("settings->menu:back", "settings", {"root": True}, "menu", action="back"),
    ]
    return app("browser", "home", states, transitions, "Web browser with menu, settings and history")


def health():
    states = {
        "dashboard": screen(
            title("Today"),
            group("dashboard_list",
                  button("water_card", "Water"),
                  button("steps_card", "Steps"),
                  button("energy_card", "Energy intake"),
                  button("profile_tab", "Profile"),
                  button("settings_btn", "Settings")),
        ),
        "water": screen(
            title("Water"),
            label("water_progress", "1200 / 2000 ml"),
            button("log_glass", "Log a glass"),
            switch("water_reminder_switch", "Water reminders"),
        ),
        "steps": screen(title("Steps"), label("steps_count", "6412 steps")),
        "nutrition": screen(
            title("Nutrition"),
            switch("track_calories", "Track daily calories"),
            label("meals_logged", "Meals logged: 2"),
        ),
        "profile": screen(
            title("Profile"),
            group("profile_stats", label("stat_row", "Weight: 70 kg"), label("stat_row", "Height: 175 cm")),
            button("delete_data", "Delete profile data"),
        ),
        "delete_dialog": screen(
            label("dialog_title", "Delete all data?"),
            button("cancel_btn", "Cancel"),
            button("confirm_btn", "Delete"),
        ),
        "settings": screen(
            title("Settings"),
            group("settings_list",
                  button("pref_units", "Units"),
                  label("units_summary", "Imperial"),
                  button("pref_notifications", "Notifications"),
                  button("pref_account", "Account")),
        ),
        "units": screen(
            title("Units"),
            group("units_list",
                  el("RadioButton", "unit_imperial", "Imperial", click=True, checked=True),
                  el("RadioButton", "unit_metric", "Metric", click=True)),
        ),
    }
    transitions = [
        tr("dashboard->water", "dashboard", R("water_card"), "water"),
        tr("dashboard->steps", "dashboard", R("steps_card"), "steps"),
        tr("dashboard->nutrition", "dashboard", R("energy_card"), "nutrition"),
        tr("dashboard->profile", "dashboard", R("profile_tab"), "profile"),
        tr("dashboard->settings", "dashboard", R("settings_btn"), "settings"),
        tr("water:log", "water", R("log_glass"), "water", [set_(R("water_progress"), text="1450 / 2000 ml")]),
        tr("water:reminders", "water", R("water_reminder_switch"), "water",
           [set_(R("water_reminder_switch"), checked="true")]),
        tr("nutrition:track", "nutrition", R("track_calories"), "nutrition",
           [set_(R("track_calories"), checked="true")]),
        tr("profile->delete_dialog", "profile", R("delete_data"), "delete_dialog"),
        tr("delete_dialog->profile:cancel", "delete_dialog", R("cancel_btn"), "profile"),
        tr("delete_dialog->profile:confirm", "delete_dialog", R("confirm_btn"), "profile", [remove(R("stat_row"))]),
        tr("settings->units", "settings", R("pref_units"), "units"),
        tr("units->settings:metric", "units", R("unit_metric"), "settings",
           [set_(R("units_summary"), text="Metric")]),
        tr("units->settings:imperial", "units", R("unit_imperial"), "settings"),
    ]
    return app("health", "dashboard", states, transitions, "Health tracker with water, nutrition and profile")


def camera():
    states = {
        "viewfinder": screen(
            button("flash_btn", "Flash: Off"),
            button("mode_btn", "Auto"),
            button("shutter_btn", desc="Shutter", cls="ImageButton"),
            button("gallery_thumb", desc="Gallery", cls="ImageView"),
            button("settings_btn", desc="Settings", cls="ImageButton"),
        ),
        "modes": screen(title("Modes"), button("mode_auto", "Auto"), button("mode_portrait", "Portrait")),
        "settings": screen(
            title("Camera settings"),
            group("settings_list",
                  switch("grid_switch", "Grid lines"),
                  button("pref_timer", "Timer"),
                  label("timer_summary", "Off"),
                  switch("location_switch", "Save location")),
        ),
        "timer": screen(
            title("Timer"),
            group("timer_options",
                  el("RadioButton", "timer_off", "Off", click=True, checked=True),
                  el("RadioButton", "timer_3", "3 sec", click=True),
                  el("RadioButton", "timer_10", "10 sec", click=True)),
        ),
        "gallery": screen(
            title("Gallery"),
            group("gallery_grid",
                  *[button("photo_item", desc=f"Photo {i}", cls="ImageView") for i in (1, 2, 3)],
                  cls="GridView"),
            button("delete_all", "Delete all"),
        ),
        "delete_dialog": screen(
            label("dialog_title", "Delete 3 photos?"),
            button("cancel_btn", "Cancel"),
            button("confirm_btn", "Delete"),
        ),
        "photo_view": screen(title("Photo"), button("share_btn", "Share")),
    }
    transitions = [
        tr("viewfinder:flash", "viewfinder", R("flash_btn"), "viewfinder", [set_(R("flash_btn"), text="Flash: On")]),
        tr("viewfinder->modes", "viewfinder", R("mode_btn"), "modes"),
        tr("viewfinder->gallery", "viewfinder", R("gallery_thumb"), "gallery"),
        tr("viewfinder->settings", "viewfinder", R("settings_btn"), "settings"),
        tr("settings:grid", "settings", R("grid_switch"), "settings", [set_(R("grid_switch"), checked="true")]),
        tr("settings->timer", "settings", R("pref_timer"), "timer"),
        tr("timer->settings:10", "timer", R("timer_10"), "settings", [set_(R("timer_summary"), text="10 sec")]),
        tr("timer->settings:3", "timer", R("timer_3"), "settings", [set_(R("timer_summary"), text="3 sec")]),
        tr("gallery->photo_view", "gallery", R("photo_item"), "photo_view"),
        tr("gallery->delete_dialog", "gallery", R("delete_all"), "delete_dialog"),
        tr("delete_dialog->gallery:cancel", "delete_dialog", R("cancel_btn"), "gallery"),
        tr("delete_dialog->gallery:confirm", "delete_dialog", R("confirm_btn"), "gallery",
           [remove(R("photo_item")), append(R("gallery_grid"), label("empty_label", "No photos"))]),
    ]
    return app("camera", "viewfinder", states, transitions, "Camera with settings, timer and gallery")


def news():
    states = {
        "feed": screen(
            title("Top stories"),
            button("search_btn", desc="Search", cls="ImageButton"),
            button("topics_tab", "Topics"),
            button("settings_btn", desc="Settings", cls="ImageButton"),
            group("feed_list",
                  button("headline", "Markets rally on rate cut"),
                  button("headline", "Home team wins final"),
                  cls="RecyclerView"),
        ),
        "article": screen(title("Article"), label("article_body", "Full story text"), button("share_btn", "Share")),
        "settings": screen(
            title("Settings"),
            group("settings_list",
                  button("pref_appearance", "Appearance"),
                  button("pref_language", "Language"),
                  label("language_summary", "English"),
                  button("pref_notifications", "Notifications")),
        ),
        "language": screen(
            title("Language"),
            group("language_list", *[button("language_row", n) for n in ("English", "Bengali", "Hindi")]),
        ),
        "appearance": screen(
            title("Appearance"),
            group("appearance_list", switch("night_switch", "Night mode"), button("pref_text_size", "Text size")),
        ),
        "topics": screen(
            title("Topics"),
            group("topic_list", *[button("topic_row", n) for n in ("Sports", "Technology", "Politics")]),
        ),
        "tech_topic": screen(
            title("Technology"),
            button("follow_btn", "Follow"),
            group("topic_articles", button("headline", "Chip makers expand")),
        ),
        "search": screen(
            el("EditText", "search_field", "", "Search news"),
            label("recent_header", "Recent searches"),
            group("recent_list", button("recent_row", "election results"), button("recent_row", "weather")),
            button("clear_recent", "Clear history"),
        ),
    }
    transitions = [
        tr("feed->search", "feed", R("search_btn"), "search"),
        tr("feed->topics", "feed", R("topics_tab"), "topics"),
        tr("feed->settings", "feed", R("settings_btn"), "settings"),
        tr("feed->article", "feed", R("headline"), "article"),
        tr("settings->appearance", "settings", R("pref_appearance"), "appearance"),
        tr("settings->language", "settings", R("pref_language"), "language"),
        tr("language->settings:bengali", "language", T("Bengali"), "settings",
           [set_(R("title"), text="সেটিংস"), set_(R("language_summary"), text="Bengali")]),
        tr("language->settings:hindi", "language", T("Hindi"), "settings",
           [set_(R("language_summary"), text="Hindi")]),
        tr("appearance:night", "appearance", R("night_switch"), "appearance",
           [set_(R("night_switch"), checked="true")]),
        tr("topics->tech_topic", "topics", T("Technology"), "tech_topic"),
        tr("tech_topic:follow", "tech_topic", R("follow_btn"), "tech_topic", [set_(R("follow_btn"), text="Following")]),
        tr("search:clear", "search", R("clear_recent"), "search", [remove(R("recent_row"))]),
    ]
    return app("news", "feed", states, transitions, "News reader with topics, search and localisation")


def social():
    def post(author, body):
        return group(f"post_{author}",
                     label("post_author", f"@{author}"),
                     label("post_body", body),
                     button("more_btn", desc="More options", cls="ImageButton"))

    states = {
        "timeline": screen(
            title("Home"),
            group("feed_list", post("alex", "Great concert tonight"), post("sam", "Coffee first"),
                  cls="RecyclerView"),
            button("compose_btn", desc="Compose", cls="ImageButton"),
            group("nav_bar",
                  button("profile_tab", "Profile"),
                  button("drafts_tab", "Drafts"),
                  button("settings_btn", desc="Settings", cls="ImageButton")),
        ),
        "more_sheet": screen(
            button("mute_user", "Mute @alex"),
            button("report_post", "Report post"),
            button("copy_link", "Copy link"),
        ),
        "profile": screen(
            title("@me"),
            button("edit_profile", "Edit profile"),
            switch("private_switch", "Private account"),
            label("follower_count", "120 followers"),
        ),
        "settings": screen(
            title("Settings"),
            group("settings_list",
                  button("pref_privacy", "Privacy"),
                  button("pref_notifications", "Notifications"),
                  button("pref_blocked", "Blocked accounts")),
        ),
        "notifications": screen(
            title("Notifications"),
            group("notify_list",
                  switch("notify_likes", "Likes", on=True),
                  switch("notify_mentions", "Mentions"),
                  switch("notify_follows", "New followers", on=True)),
        ),
        "drafts": screen(
            title("Drafts"),
            group("drafts_list",
                  group("draft_row", label("draft_text", "Concert tonight!"), button("draft_delete", "Delete")),
                  group("draft_row", label("draft_text", "Weekend plans"), button("draft_delete", "Delete"))),
        ),
        "discard_dialog": screen(
            label("dialog_title", "Delete this draft?"),
            button("cancel_btn", "Cancel"),
            button("confirm_btn", "Delete"),
        ),
        "compose": screen(
            el("EditText", "compose_field", "", "What is happening?"),
            button("save_draft", "Save draft"),
        ),
    }
    transitions = [
        tr("timeline->more_sheet", "timeline", R("more_btn"), "more_sheet"),
        tr("timeline->compose", "timeline", R("compose_btn"), "compose"),
        tr("timeline->profile", "timeline", R("profile_tab"), "profile"),
        tr("timeline->drafts", "timeline", R("drafts_tab"), "drafts"),
        tr("timeline->settings", "timeline", R("settings_btn"), "settings"),
        tr("more_sheet->timeline:mute", "more_sheet", R("mute_user"), "timeline",
           [remove(R("post_alex")), append(R("feed_list"), label("toast", "Muted @alex"))]),
        tr("profile:private", "profile", R("private_switch"), "profile", [set_(R("private_switch"), checked="true")]),
        tr("settings->notifications", "settings", R("pref_notifications"), "notifications"),
        tr("notifications:mentions", "notifications", R("notify_mentions"), "notifications",
           [set_(R("notify_mentions"), checked="true")]),
        tr("drafts->discard_dialog", "drafts", R("draft_delete"), "discard_dialog"),
        tr("discard_dialog->drafts:cancel", "discard_dialog", R("cancel_btn"), "drafts"),
        tr("discard_dialog->drafts:confirm", "discard_dialog", R("confirm_btn"), "drafts",
           [remove(R("draft_row", 0))]),
    ]
    return app("social", "timeline", states, transitions, "Social timeline with drafts, muting and privacy")


def notes():
    def row(name):
        return group("note_row", button("note_title", name, cls="TextView"),
                     button("delete_btn", desc="Delete note", cls="ImageButton"))

    states = {
        "home": screen(
            title("Notes"),
            group("note_list", row("Groceries"), row("Meeting agenda"), row("Travel plans"), cls="RecyclerView"),
            label("sort_label", "Sort: title"),
            button("compose_fab", desc="Compose", cls="ImageButton"),
            button("more_btn", desc="More options", cls="ImageButton"),
        ),
        "delete_dialog": screen(
            label("dialog_title", "Confirm deletion"),
            label("dialog_message", "This cannot be undone."),
            button("cancel_btn", "Cancel"),
            button("confirm_btn", "Delete"),
        ),
        "editor": screen(el("EditText", "note_body", "Buy milk", "Note body"), button("done_btn", "Done")),
        "menu": screen(
            title("Options"),
            group("menu_list", button("menu_sort", "Sort by"), button("menu_settings", "Settings")),
        ),
        "sort_dialog": screen(
            label("dialog_title", "Sort by"),
            el("RadioButton", "sort_title", "Title", click=True, checked=True),
            el("RadioButton", "sort_modified", "Date modified", click=True),
            el("RadioButton", "sort_created", "Date created", click=True),
        ),
        "settings": screen(
            title("Settings"),
            group("settings_list",
                  switch("app_lock", "App lock"),
                  label("lock_summary", "Off"),
                  button("pref_theme", "Theme")),
        ),
        "pin_setup": screen(
            title("Set PIN"),
            el("EditText", "pin_field", "", "PIN"),
        ),
    }
    transitions = [
        tr("home->delete_dialog", "home", R("delete_btn"), "delete_dialog"),
        tr("home->editor", "home", R("note_title"), "editor"),
        tr("home->menu", "home", R("more_btn"), "menu"),
        tr("delete_dialog->home:cancel", "delete_dialog", R("cancel_btn"), "home"),
        tr("delete_dialog->home:confirm", "delete_dialog", R("confirm_btn"), "home", [remove(R("note_row", 0))]),
        tr("menu->sort_dialog", "menu", R("menu_sort"), "sort_dialog"),
        tr("menu->settings", "menu", R("menu_settings"), "settings"),
        tr("sort_dialog->home:modified", "sort_dialog", R("sort_modified"), "home",
           [set_(R("sort_label"), text="Sort: date modified")]),
        tr("sort_dialog->home:title", "sort_dialog", R("sort_title"), "home"),
        tr("settings->pin_setup", "settings", R("app_lock"), "pin_setup"),
        tr("pin_setup->settings:pin", "pin_setup", R("pin_field"), "settings",
           [set_(R("app_lock"), checked="true"), set_(R("lock_summary"), text="PIN set")], action="input-text"),
    ]
    return app("notes", "home", states, transitions, "Notes with confirmation-guarded deletion and app lock")


# --------------------------------------------------------------------------
# cases and mutations

CASES = [
    # app, case id suffix, requirement, category
    ("browser", "bengali", "Bengali language support", "choice"),
    ("browser", "dark-theme", "Support a dark theme", "toggle"),
    ("browser", "clear-history", "Clear browsing history", "deletion"),
    ("browser", "downloads", "Show downloaded files", "navigation"),
    ("health", "water-reminders", "Enable water reminders", "toggle"),
    ("health", "calories", "Track daily calories", "toggle"),
    ("health", "delete-profile", "Delete my profile data", "deletion"),
    ("health", "metric-units", "Switch units to metric", "choice"),
    ("camera", "grid", "Show grid lines", "toggle"),
    ("camera", "timer", "10 second self timer", "choice"),
    ("camera", "delete-photos", "Delete all photos in the gallery", "deletion"),
    ("camera", "flash", "Turn on the flash", "toggle"),
    ("news", "bengali", "Bengali language support", "choice"),
    ("news", "night-mode", "Turn on night mode", "toggle"),
    ("news", "follow-topic", "Follow the technology topic", "choice"),
    ("news", "clear-search", "Clear search history", "deletion"),
    ("social", "private", "Make my account private", "toggle"),
    ("social", "mute", "Mute a user", "deletion"),
    ("social", "mention-alerts", "Change notification settings for mentions", "toggle"),
    ("social", "delete-draft", "Delete a draft post", "deletion"),
    ("notes", "delete-confirm", "Show a confirmation window before deleting a note", "deletion"),
    ("notes", "sort-date", "Sort by modification date", "choice"),
    ("notes", "app-lock", "Lock the app with a PIN", "input"),
]

# case suffix -> [(mutation id, kind, target, expected failing phase)]
MUTATIONS = {
    ("browser", "bengali"): [
        ("browser-no-language-row", "remove-element", {"state": "settings", "selector": R("pref_language")}, "phase1"),
        ("browser-bengali-typo", "corrupt-label",
         {"state": "language", "selector": T("Bengali"), "value": "Bengli"}, "phase2"),
        ("browser-bengali-no-effect", "drop-effect", {"transition": "language->settings:bengali"}, "phase3"),
        ("browser-language-dead", "noop-transition", {"transition": "settings->language"}, "phase2"),
    ],
    ("browser", "dark-theme"): [
        ("browser-dark-no-effect", "drop-effect", {"transition": "appearance:dark"}, "phase3"),
    ],
    ("browser", "clear-history"): [
        ("browser-clear-to-menu", "retarget-transition", {"transition": "history:clear", "to": "menu"}, "phase3"),
    ],
    ("browser", "downloads"): [
        ("browser-downloads-dead", "noop-transition", {"transition": "menu->downloads"}, "phase2"),
    ],
    ("health", "water-reminders"): [
        ("health-reminder-no-effect", "drop-effect", {"transition": "water:reminders"}, "phase3"),
    ],
    ("health", "calories"): [
        ("health-no-calorie-switch", "remove-element",
         {"state": "nutrition", "selector": R("track_calories")}, "phase1"),
    ],
    ("health", "delete-profile"): [
        ("health-confirm-dead", "noop-transition", {"transition": "delete_dialog->profile:confirm"}, "phase3"),
        ("health-confirm-no-effect", "drop-effect", {"transition": "delete_dialog->profile:confirm"}, "phase3"),
    ],
    ("health", "metric-units"): [
        ("health-metric-typo", "corrupt-label", {"state": "units", "selector": R("unit_metric"), "value": "Metrc"},
         "phase2"),
        ("health-metric-to-units", "retarget-transition", {"transition": "units->settings:metric", "to": "units"},
         "phase3"),
    ],
    ("camera", "grid"): [
        ("camera-grid-no-effect", "drop-effect", {"transition": "settings:grid"}, "phase3"),
    ],
    ("camera", "timer"): [
        ("camera-timer-typo", "corrupt-label", {"state": "timer", "selector": R("timer_10"), "value": "1 sec"},
         "phase2"),
    ],
    ("camera", "delete-photos"): [
        ("camera-confirm-stays", "retarget-transition",
         {"transition": "delete_dialog->gallery:confirm", "to": "delete_dialog"}, "phase3"),
        ("camera-gallery-dead", "noop-transition", {"transition": "viewfinder->gallery"}, "phase2"),
    ],
    ("camera", "flash"): [
        ("camera-no-flash", "remove-element", {"state": "viewfinder", "selector": R("flash_btn")}, "phase1"),
        ("camera-flash-no-effect", "drop-effect", {"transition": "viewfinder:flash"}, "phase3"),
    ],
    ("news", "bengali"): [
        ("news-no-bengali-row", "remove-element", {"state": "language", "selector": T("Bengali")}, "phase2"),
        ("news-bengali-typo", "corrupt-label", {"state": "language", "selector": T("Bengali"), "value": "Bengli"},
         "phase2"),
        ("news-bengali-to-feed", "retarget-transition",
         {"transition": "language->settings:bengali", "to": "feed"}, "phase3"),
    ],
    ("news", "night-mode"): [
        ("news-night-no-effect", "drop-effect", {"transition": "appearance:night"}, "phase3"),
    ],
    ("news", "follow-topic"): [
        ("news-follow-no-effect", "drop-effect", {"transition": "tech_topic:follow"}, "phase3"),
        ("news-no-topics-tab", "remove-element", {"state": "feed", "selector": R("topics_tab")}, "phase1"),
    ],
    ("news", "clear-search"): [
        ("news-clear-dead", "noop-transition", {"transition": "search:clear"}, "phase3"),
    ],
    ("social", "private"): [
        ("social-private-no-effect", "drop-effect", {"transition": "profile:private"}, "phase3"),
    ],
    ("social", "mute"): [
        ("social-mute-stays", "retarget-transition",
         {"transition": "more_sheet->timeline:mute", "to": "more_sheet"}, "phase3"),
    ],
    ("social", "mention-alerts"): [
        ("social-notifications-typo", "corrupt-label",
         {"state": "settings", "selector": R("pref_notifications"), "value": "Notfications"}, "phase2"),
    ],
    ("social", "delete-draft"): [
        ("social-discard-dead", "noop-transition", {"transition": "discard_dialog->drafts:confirm"}, "phase3"),
        ("social-no-drafts-tab", "remove-element", {"state": "timeline", "selector": R("drafts_tab")}, "phase1"),
    ],
    ("notes", "delete-confirm"): [
        ("notes-confirm-stays", "retarget-transition",
         {"transition": "delete_dialog->home:confirm", "to": "delete_dialog"}, "phase3"),
        ("notes-confirm-no-effect", "drop-effect", {"transition": "delete_dialog->home:confirm"}, "phase3"),
        ("notes-dialog-unlabelled", "corrupt-label",
         {"state": "delete_dialog", "selector": R("dialog_title"), "value": "Are you sure?"}, "phase2"),
    ],
    ("notes", "sort-date"): [
        ("notes-sort-no-effect", "drop-effect", {"transition": "sort_dialog->home:modified"}, "phase3"),
    ],
    ("notes", "app-lock"): [
        ("notes-no-app-lock", "remove-element", {"state": "settings", "selector": R("app_lock")}, "phase1"),
        ("notes-pin-dead", "noop-transition", {"transition": "pin_setup->settings:pin"}, "phase3"),
    ],
}


# --------------------------------------------------------------------------
# test-only fixtures


def backtrack_app():
    """Settings page whose best-looking branch dead-ends, forcing a replay back to it."""
    states = {
        "home": screen(button("settings_btn", "Settings"), button("feed_btn", "Feed"), button("profile_btn", "Profile")),
        "settings": screen(
            title("Settings"),
            button("pref_theme", "Theme"),
            group("pref_display", label("display_title", "Display"), label("display_summary", "Dark mode, font size"),
                  cls="LinearLayout", click=True),
        ),
        "theme": screen(title("Colors"), button("color_blue", "Blue"), button("color_green", "Green")),
        "display": screen(title("Display"), switch("dark_mode", "Dark mode"), button("font_size", "Font size")),
        "feed": screen(title("Feed"), button("post", "Post")),
    }
    transitions = [
        tr("home->settings", "home", R("settings_btn"), "settings"),
        tr("home->feed", "home", R("feed_btn"), "feed"),
        tr("settings->theme", "settings", R("pref_theme"), "theme"),
        tr("settings->display", "settings", R("pref_display"), "display"),
        tr("display:dark", "display", R("dark_mode"), "display", [set_(R("dark_mode"), checked="true")]),
    ]
    return app("backtrack", "home", states, transitions, "Best branch dead-ends; entry sits on the second branch")


def ranking_app():
    """Three equally generic hub buttons; only the third leads to the entry."""
    states = {
        "home": screen(button("menu_btn", "Menu"), button("more_btn", "More"), button("tools_btn", "Tools")),
        "menu": screen(title("Menu page"), button("about", "About"), button("help", "Help")),
        "more": screen(title("More page"), button("feedback", "Feedback"), button("legal", "Legal")),
        "tools": screen(title("Tools page"), button("converter", "Unit converter")),
        "about": screen(title("About page"), label("version", "1.0")),
    }
    transitions = [
        tr("home->menu", "home", R("menu_btn"), "menu"),
        tr("home->more", "home", R("more_btn"), "more"),
        tr("home->tools", "home", R("tools_btn"), "tools"),
        tr("menu->about", "menu", R("about"), "about"),
    ]
    return app("ranking", "home", states, transitions, "Correct branch ranks third among tied candidates")


def chain_app():
    states = {
        "home": screen(button("settings_btn", "Settings"), button("feed_btn", "Feed"), button("profile_btn", "Profile")),
        "settings": screen(title("Settings"), button("pref_appearance", "Appearance"), button("pref_about", "About")),
        "appearance": screen(title("Appearance"), switch("dark_mode", "Dark mode")),
        "feed": screen(title("Feed"), button("post", "Post")),
        "profile": screen(title("Profile"), button("edit", "Edit")),
    }
    transitions = [
        tr("home->settings", "home", R("settings_btn"), "settings"),
        tr("home->feed", "home", R("feed_btn"), "feed"),
        tr("home->profile", "home", R("profile_btn"), "profile"),
        tr("settings->appearance", "settings", R("pref_appearance"), "appearance"),
        tr("appearance:dark", "appearance", R("dark_mode"), "appearance", [set_(R("dark_mode"), checked="true")]),
    ]
    return app("chain", "home", states, transitions, "Three-state chain home, settings, appearance")


def write(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


def main() -> None:
    builders = {"browser": browser, "health": health, "camera": camera, "news": news, "social": social,
                "notes": notes}
    for name, build in builders.items():
        write(CORPUS / "apps" / f"{name}.json", build())

    cases, mutations = [], {}
    for app_id, suffix, requirement, category in CASES:
        base = {"requirement": requirement, "app": f"apps/{app_id}.json",
                "tags": {"app": app_id, "category": category}}
        cases.append({"case_id": f"{app_id}-{suffix}", "correct": True, **base})
        for mid, kind, target, phase in MUTATIONS.get((app_id, suffix), []):
            mutations.setdefault(app_id, []).append(
                {"id": mid, "kind": kind, "target": target, "expect_phase": phase})
            cases.append({"case_id": mid, "correct": False, "mutation": mid, **base})
    write(CORPUS / "manifest.json", {"mutations": "mutations.json", "cases": cases})
    write(CORPUS / "mutations.json", mutations)

    for name, build in {"backtrack": backtrack_app, "ranking": ranking_app, "chain": chain_app}.items():
        write(FIXTURES / f"{name}.json", build())
    write_mini_corpus(chain_app(), notes())


def write_mini_corpus(chain: dict, notes_app: dict) -> None:
    """Four-case corpus behind the golden report test."""
    root = FIXTURES / "mini_corpus"
    write(root / "apps" / "chain.json", chain)
    write(root / "apps" / "notes.json", notes_app)
    write(root / "mutations.json", {
        "chain": [{"id": "chain-dark-no-effect", "kind": "drop-effect",
                   "target": {"transition": "appearance:dark"}, "expect_phase": "phase3"}],
        "notes": [{"id": "notes-confirm-stays", "kind": "retarget-transition",
                   "target": {"transition": "delete_dialog->home:confirm", "to": "delete_dialog"},
                   "expect_phase": "phase3"}],
    })
    delete_req = "Show a confirmation window before deleting a note"
    cases = [
        {"case_id": "chain-dark", "requirement": "Dark mode", "app": "apps/chain.json", "correct": True,
         "tags": {"app": "chain", "category": "toggle"}},
        {"case_id": "chain-dark-no-effect", "requirement": "Dark mode", "app": "apps/chain.json",
         "correct": False, "mutation": "chain-dark-no-effect", "tags": {"app": "chain", "category": "toggle"}},
        {"case_id": "notes-delete-confirm", "requirement": delete_req, "app": "apps/notes.json", "correct": True,
         "tags": {"app": "notes", "category": "deletion"}},
        {"case_id": "notes-confirm-stays", "requirement": delete_req, "app": "apps/notes.json", "correct": False,
         "mutation": "notes-confirm-stays", "tags": {"app": "notes", "category": "deletion"}},
    ]
    write(root / "manifest.json", {"mutations": "mutations.json", "cases": cases})


if __name__ == "__main__":
    main()
